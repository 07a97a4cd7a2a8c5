#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "ueglab/ueglab.h"

namespace {

namespace fs = std::filesystem;

constexpr int exit_ok = 0, exit_invalid = 1, exit_flagged = 2;

struct Failure {
  std::string message;
};

void check(ueg_status status) {
  if (status != UEG_OK) throw Failure{std::string(ueg_status_name(status)) + ": " + ueg_last_error()};
}

class Run {
 public:
  explicit Run(const std::string& command) { check(ueg_run_create(command.c_str(), &run_)); }
  explicit Run(ueg_run* adopted) : run_(adopted) {}
  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;
  ~Run() { ueg_run_destroy(run_); }
  ueg_run* get() const { return run_; }

 private:
  ueg_run* run_ = nullptr;
};

// Options shared by the computing subcommands. Precedence, lowest first:
// defaults, --config file, named flags, --set.
struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string out = "results";
  bool quiet = false;
  std::map<std::string, std::string> named;  // key -> value from named flags
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("-c,--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
  app->add_option("-s,--set", o.sets, "override one key, KEY=VALUE (repeatable)");
  app->add_option("-o,--out", o.out, "output directory")->capture_default_str();
  app->add_flag("-q,--quiet", o.quiet, "suppress progress messages");
}

void add_named(CLI::App* app, CommonOptions& o, const std::string& flag, const std::string& key,
               const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&o, key](const std::string& v) { o.named[key] = v; }, help);
}

void progress(const char* message, void*) { std::cerr << message << '\n'; }

int report(const Run& run, const std::string& out) {
  for (size_t i = 0; i < ueg_run_warning_count(run.get()); ++i)
    std::cerr << "warning: " << ueg_run_warning(run.get(), i) << '\n';
  for (size_t i = 0; i < ueg_run_output_count(run.get()); ++i)
    std::cout << (fs::path(out) / ueg_run_output(run.get(), i)).string() << '\n';
  const size_t flags = ueg_run_flag_count(run.get());
  for (size_t i = 0; i < flags; ++i) std::cerr << "flag: " << ueg_run_flag(run.get(), i) << '\n';
  return flags ? exit_flagged : exit_ok;
}

int run_command(const std::string& command, const CommonOptions& o) {
  Run run(command);
  if (!o.config.empty()) check(ueg_run_load_config(run.get(), o.config.c_str()));
  for (const auto& [key, value] : o.named) check(ueg_run_set(run.get(), key.c_str(), value.c_str(), "command line"));
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw Failure{"--set expects KEY=VALUE, got '" + s + "'"};
    const std::string origin = "--set " + s;
    check(ueg_run_set(run.get(), s.substr(0, eq).c_str(), s.substr(eq + 1).c_str(), origin.c_str()));
  }
  check(ueg_run_execute(run.get(), o.out.c_str(), o.quiet ? nullptr : progress, nullptr));
  return report(run, o.out);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Failure{"cannot read " + p.string()};
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int rerun(const std::string& manifest, const std::string& out, bool verify, bool quiet) {
  ueg_run* raw = nullptr;
  check(ueg_run_from_manifest(manifest.c_str(), &raw));
  Run run(raw);
  const fs::path original = fs::absolute(manifest).parent_path();
  const fs::path target = out.empty() ? original / "rerun" : fs::path(out);
  if (fs::exists(target) && fs::equivalent(target, original))
    throw Failure{"rerun output directory must differ from the manifest's directory"};
  check(ueg_run_execute(run.get(), target.string().c_str(), quiet ? nullptr : progress, nullptr));
  int code = report(run, target.string());
  if (verify) {
    bool same = true;
    for (size_t i = 0; i < ueg_run_output_count(run.get()); ++i) {
      const std::string name = ueg_run_output(run.get(), i);
      if (fs::path(name).extension() != ".csv") continue;
      const bool match = fs::exists(original / name) && slurp(original / name) == slurp(target / name);
      std::cerr << (match ? "identical: " : "DIFFERS: ") << name << '\n';
      same &= match;
    }
    if (!same) throw Failure{"rerun outputs differ from the originals"};
  }
  return code;
}

int list_keys(const std::string& only) {
  for (size_t c = 0; c < ueg_command_count(); ++c) {
    const std::string command = ueg_command_name(c);
    if (!only.empty() && only != command) continue;
    size_t n = 0;
    check(ueg_command_key_count(command.c_str(), &n));
    std::cout << "[" << command << "]\n";
    for (size_t i = 0; i < n; ++i) {
      const char *key, *def, *help;
      check(ueg_command_key(command.c_str(), i, &key, &def, &help));
      std::cout << "  " << key << " = " << def << "\n      " << help << '\n';
    }
  }
  if (!only.empty() && only != "scan" && only != "entropy" && only != "madelung" && only != "fit")
    throw Failure{"unknown command '" + only + "'"};
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Variational conditional-probability Monte Carlo for the uniform electron gas, with "
               "information-theoretic descriptors. Thread count: --set threads=N or UEGLAB_THREADS."};
  app.set_version_flag("--version", std::string(ueg_version()));
  app.require_subcommand(1);

  CommonOptions scan_opt, entropy_opt, madelung_opt, fit_opt;

  auto* scan = app.add_subcommand("scan", "density scan: gamma search, production chains, log fits");
  add_common(scan, scan_opt);
  add_named(scan, scan_opt, "--densities", "densities", "comma-separated densities (e/bohr^3)");
  add_named(scan, scan_opt, "--electrons", "electrons", "electrons per cell");
  add_named(scan, scan_opt, "--seed", "seed", "master seed");
  add_named(scan, scan_opt, "--threads", "threads", "worker lanes");

  auto* entropy = app.add_subcommand("entropy", "entropy descriptors of a radial or uniform density");
  add_common(entropy, entropy_opt);
  add_named(entropy, entropy_opt, "-i,--input", "input", "CSV with columns r,rho");
  add_named(entropy, entropy_opt, "--norm", "norm", "declared norm of the table");
  add_named(entropy, entropy_opt, "--uniform-norm", "uniform_norm", "electrons of a uniform density");
  add_named(entropy, entropy_opt, "--uniform-volume", "uniform_volume", "volume of a uniform density");
  add_named(entropy, entropy_opt, "--log-base", "log_base", "e or 2");

  auto* madelung = app.add_subcommand("madelung", "Ewald alpha-scan and Madelung diagnostic");
  add_common(madelung, madelung_opt);
  add_named(madelung, madelung_opt, "--electrons", "electrons", "electrons in the cell");
  add_named(madelung, madelung_opt, "--edge", "edge", "cell edge (bohr)");
  add_named(madelung, madelung_opt, "--oracle", "oracle", "CSV of reference energies N,L,energy");

  auto* fit = app.add_subcommand("fit", "fit A + B ln(rho) to a scan or reference table");
  add_common(fit, fit_opt);
  add_named(fit, fit_opt, "-i,--input", "input", "scan.csv or r_s,e_c[,e_c_err] table");
  add_named(fit, fit_opt, "--window-lo", "window_lo", "window start (e/bohr^3)");
  add_named(fit, fit_opt, "--window-hi", "window_hi", "window end (e/bohr^3)");

  std::string manifest, rerun_out;
  bool verify = false, rerun_quiet = false;
  auto* re = app.add_subcommand("rerun", "repeat a run from its manifest.json");
  re->add_option("manifest", manifest, "manifest.json of a previous run")->required()->check(CLI::ExistingFile);
  re->add_option("-o,--out", rerun_out, "output directory (default: <manifest dir>/rerun)");
  re->add_flag("--verify", verify, "compare the CSV outputs byte for byte with the originals");
  re->add_flag("-q,--quiet", rerun_quiet, "suppress progress messages");

  std::string keys_for;
  auto* keys = app.add_subcommand("keys", "list configuration keys, defaults and meanings");
  keys->add_option("command", keys_for, "restrict to one command");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_invalid;
  }

  try {
    if (*scan) return run_command("scan", scan_opt);
    if (*entropy) return run_command("entropy", entropy_opt);
    if (*madelung) return run_command("madelung", madelung_opt);
    if (*fit) return run_command("fit", fit_opt);
    if (*re) return rerun(manifest, rerun_out, verify, rerun_quiet);
    if (*keys) return list_keys(keys_for);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return exit_invalid;
  }
  return exit_invalid;
}
