#include "ueglab/ueglab.h"

#include <memory>
#include <new>
#include <string>
#include <vector>

#include "ueglab/analysis.hpp"
#include "ueglab/cell.hpp"
#include "ueglab/entropy.hpp"
#include "ueglab/error.hpp"
#include "ueglab/estimators.hpp"
#include "ueglab/ewald.hpp"
#include "ueglab/workflow.hpp"

struct ueg_run {
  ueglab::RunConfig config;
  ueglab::RunOutcome outcome;
  std::string scratch;
};

struct ueg_ewald {
  ueglab::SimulationCell cell;
  ueglab::EwaldParameters params;
};

namespace {

thread_local std::string last_error;

template <class F>
ueg_status guard(F&& body) {
  try {
    body();
    last_error.clear();
    return UEG_OK;
  } catch (const ueglab::Error& e) {
    last_error = e.what();
    return static_cast<ueg_status>(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return UEG_INTERNAL_ERROR;
}

void need(const void* p, const char* what) {
  if (!p) ueglab::fail(ueglab::ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

const char* item(const std::vector<std::string>& v, size_t i) { return i < v.size() ? v[i].c_str() : nullptr; }

}  // namespace

extern "C" {

const char* ueg_version(void) { return UEGLAB_VERSION; }
const char* ueg_last_error(void) { return last_error.c_str(); }

const char* ueg_status_name(ueg_status status) {
  switch (status) {
    case UEG_OK: return "ok";
    case UEG_INVALID_ARGUMENT: return "invalid argument";
    case UEG_DEGENERATE_CONFIGURATION: return "degenerate configuration";
    case UEG_PARSE_ERROR: return "parse error";
    case UEG_INSUFFICIENT_DATA: return "insufficient data";
    case UEG_IO_ERROR: return "i/o error";
    default: return "internal error";
  }
}

size_t ueg_command_count(void) { return ueglab::command_names().size(); }
const char* ueg_command_name(size_t index) { return item(ueglab::command_names(), index); }

ueg_status ueg_command_key_count(const char* command, size_t* count) {
  return guard([&] {
    need(command, "command");
    need(count, "count");
    *count = ueglab::command_keys(command).size();
  });
}

ueg_status ueg_command_key(const char* command, size_t index, const char** key, const char** default_value,
                           const char** help) {
  return guard([&] {
    need(command, "command");
    const auto& keys = ueglab::command_keys(command);
    if (index >= keys.size()) ueglab::fail(ueglab::ErrorCode::invalid_argument, "key index out of range");
    if (key) *key = keys[index].key.c_str();
    if (default_value) *default_value = keys[index].default_value.c_str();
    if (help) *help = keys[index].help.c_str();
  });
}

ueg_status ueg_run_create(const char* command, ueg_run** run) {
  return guard([&] {
    need(command, "command");
    need(run, "run");
    *run = new ueg_run{ueglab::RunConfig(command), {}, {}};
  });
}

ueg_status ueg_run_from_manifest(const char* manifest_path, ueg_run** run) {
  return guard([&] {
    need(manifest_path, "manifest path");
    need(run, "run");
    *run = new ueg_run{ueglab::config_from_manifest(manifest_path), {}, {}};
  });
}

void ueg_run_destroy(ueg_run* run) { delete run; }

const char* ueg_run_command(const ueg_run* run) { return run ? run->config.command().c_str() : nullptr; }

ueg_status ueg_run_load_config(ueg_run* run, const char* path) {
  return guard([&] {
    need(run, "run");
    need(path, "path");
    run->config.load_file(path);
  });
}

ueg_status ueg_run_set(ueg_run* run, const char* key, const char* value, const char* origin) {
  return guard([&] {
    need(run, "run");
    need(key, "key");
    need(value, "value");
    run->config.set(key, value, origin ? origin : "command line");
  });
}

ueg_status ueg_run_get(ueg_run* run, const char* key, const char** value) {
  return guard([&] {
    need(run, "run");
    need(key, "key");
    need(value, "value");
    const auto all = run->config.effective();
    const auto it = all.find(key);
    if (it == all.end()) ueglab::fail(ueglab::ErrorCode::invalid_argument, std::string("unknown key '") + key + "'");
    run->scratch = it->second;
    *value = run->scratch.c_str();
  });
}

ueg_status ueg_run_execute(ueg_run* run, const char* out_dir, ueg_progress_fn progress, void* user_data) {
  return guard([&] {
    need(run, "run");
    need(out_dir, "output directory");
    ueglab::ProgressSink sink;
    if (progress) sink = [=](const std::string& m) { progress(m.c_str(), user_data); };
    run->outcome = {};
    run->outcome = ueglab::execute(run->config, out_dir, sink);
  });
}

size_t ueg_run_output_count(const ueg_run* run) { return run ? run->outcome.outputs.size() : 0; }
const char* ueg_run_output(const ueg_run* run, size_t i) { return run ? item(run->outcome.outputs, i) : nullptr; }
size_t ueg_run_warning_count(const ueg_run* run) { return run ? run->outcome.warnings.size() : 0; }
const char* ueg_run_warning(const ueg_run* run, size_t i) { return run ? item(run->outcome.warnings, i) : nullptr; }
size_t ueg_run_flag_count(const ueg_run* run) { return run ? run->outcome.flags.size() : 0; }
const char* ueg_run_flag(const ueg_run* run, size_t i) { return run ? item(run->outcome.flags, i) : nullptr; }

ueg_status ueg_density_to_rs(double density, double* rs) {
  return guard([&] {
    need(rs, "rs");
    *rs = ueglab::density_to_rs(density);
  });
}

ueg_status ueg_rs_to_density(double rs, double* density) {
  return guard([&] {
    need(density, "density");
    *density = ueglab::rs_to_density(rs);
  });
}

ueg_status ueg_thomas_fermi(double density, double* energy) {
  return guard([&] {
    need(energy, "energy");
    *energy = ueglab::thomas_fermi(density);
  });
}

ueg_status ueg_dirac_exchange(double density, double* energy) {
  return guard([&] {
    need(energy, "energy");
    *energy = ueglab::dirac_exchange(density);
  });
}

ueg_status ueg_ewald_create(int electrons, double edge, double alpha_edge, double tolerance, ueg_ewald** ewald) {
  return guard([&] {
    need(ewald, "ewald");
    const ueglab::SimulationCell cell(electrons, edge);
    const double a = alpha_edge > 0 ? alpha_edge : ueglab::EwaldParameters::default_alpha_edge;
    const double t = tolerance > 0 ? tolerance : ueglab::EwaldParameters::default_tolerance;
    *ewald = new ueg_ewald{cell, ueglab::EwaldParameters::create(cell, a, t)};
  });
}

void ueg_ewald_destroy(ueg_ewald* ewald) { delete ewald; }

ueg_status ueg_ewald_energy(const ueg_ewald* ewald, const double* xyz, double* energy) {
  return guard([&] {
    need(ewald, "ewald");
    need(xyz, "positions");
    need(energy, "energy");
    std::vector<ueglab::Vec3> pos(static_cast<std::size_t>(ewald->cell.electron_count()));
    for (std::size_t i = 0; i < pos.size(); ++i) pos[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
    *energy = ueglab::total_pair_energy(pos, ewald->params, ewald->cell);
  });
}

ueg_status ueg_ewald_pair_potential(const ueg_ewald* ewald, const double displacement[3], double* value) {
  return guard([&] {
    need(ewald, "ewald");
    need(displacement, "displacement");
    need(value, "value");
    *value = ewald->params.pair_potential({displacement[0], displacement[1], displacement[2]});
  });
}

ueg_status ueg_ewald_image_constant(const ueg_ewald* ewald, double* value) {
  return guard([&] {
    need(ewald, "ewald");
    need(value, "value");
    *value = ewald->params.image_constant();
  });
}

ueg_status ueg_shannon_discrete(const double* p, size_t n, int base_two, double* entropy) {
  return guard([&] {
    need(p, "p");
    need(entropy, "entropy");
    *entropy = ueglab::shannon_discrete({p, n}, base_two ? ueglab::LogBase::two : ueglab::LogBase::natural);
  });
}

ueg_status ueg_collins_sum(const double* occupations, size_t n, double scale, double* value) {
  return guard([&] {
    need(occupations, "occupations");
    need(value, "value");
    *value = ueglab::collins_sum({{occupations, occupations + n}, scale});
  });
}

ueg_status ueg_ziesche_entropy(const double* k, const double* values, size_t n, double* entropy) {
  return guard([&] {
    need(k, "k");
    need(values, "values");
    need(entropy, "entropy");
    *entropy = ueglab::ziesche_entropy({{k, k + n}, {values, values + n}});
  });
}

ueg_status ueg_fit_log(const double* density, const double* value, const double* error, size_t n,
                       double window_lo, double window_hi, ueg_log_fit* fit) {
  return guard([&] {
    need(density, "density");
    need(value, "value");
    need(error, "error");
    need(fit, "fit");
    std::vector<ueglab::FitPoint> pts;
    for (size_t i = 0; i < n; ++i) pts.push_back({density[i], value[i], error[i]});
    const auto f = ueglab::fit_log_model(pts, window_lo, window_hi);
    *fit = {f.a, f.b, f.a_error, f.b_error, f.cov_ab, f.r2, f.window_lo, f.window_hi, f.points};
  });
}

}  // extern "C"
