#include "choquard/choquard.h"

#include <cstring>
#include <iostream>
#include <string>

#include "choquard/config.hpp"
#include "choquard/error.hpp"
#include "choquard/field_io.hpp"
#include "choquard/functionals.hpp"
#include "choquard/ground_state.hpp"
#include "choquard/runner.hpp"

struct chq_config {
  chq::ConfigBuilder builder;
};

struct chq_field {
  chq::ComplexField field;
};

namespace {

thread_local std::string last_error;

chq_status record(chq_status s, const std::string& message) {
  last_error = message;
  return s;
}

template <class F>
chq_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return CHQ_OK;
  } catch (const chq::Error& e) {
    return record(static_cast<chq_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return record(CHQ_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return record(CHQ_ERR_RUNTIME, e.what());
  } catch (...) {
    return record(CHQ_ERR_RUNTIME, "unknown error");
  }
}

#define CHQ_NONNULL(p)                                              \
  do {                                                              \
    if (!(p)) return record(CHQ_ERR_NULL, #p " must not be null"); \
  } while (0)

}  // namespace

extern "C" {

const char* chq_version(void) { return chq::version_string(); }

const char* chq_status_name(chq_status s) {
  switch (s) {
    case CHQ_OK: return "ok";
    case CHQ_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case CHQ_ERR_DOMAIN: return "domain";
    case CHQ_ERR_IO: return "io";
    case CHQ_ERR_FORMAT: return "format";
    case CHQ_ERR_CONVERGENCE: return "convergence";
    case CHQ_ERR_SUPPORT: return "support";
    case CHQ_ERR_RUNTIME: return "runtime";
    case CHQ_ERR_NULL: return "null";
  }
  return "unknown";
}

const char* chq_last_error(void) { return last_error.c_str(); }

chq_status chq_config_create(chq_config** out) {
  CHQ_NONNULL(out);
  *out = nullptr;
  return guarded([&] { *out = new chq_config(); });
}

void chq_config_destroy(chq_config* c) { delete c; }

chq_status chq_config_load_file(chq_config* c, const char* path) {
  CHQ_NONNULL(c);
  CHQ_NONNULL(path);
  return guarded([&] { c->builder.load_file(path); });
}

chq_status chq_config_load_text(chq_config* c, const char* text, const char* origin) {
  CHQ_NONNULL(c);
  CHQ_NONNULL(text);
  return guarded([&] { c->builder.load_text(text, origin ? origin : "<text>"); });
}

chq_status chq_config_set(chq_config* c, const char* key, const char* value, const char* location) {
  CHQ_NONNULL(c);
  CHQ_NONNULL(key);
  CHQ_NONNULL(value);
  return guarded([&] { c->builder.set(key, value, location ? location : "<api>"); });
}

chq_status chq_config_validate(const chq_config* c) {
  CHQ_NONNULL(c);
  return guarded([&] { (void)c->builder.build(); });
}

chq_status chq_config_canonical(const chq_config* c, char* buf, size_t size, size_t* needed) {
  CHQ_NONNULL(c);
  return guarded([&] {
    const std::string s = chq::canonical_config(c->builder.build());
    if (needed) *needed = s.size() + 1;
    if (buf && size > 0) {
      const std::size_t n = std::min(size - 1, s.size());
      std::memcpy(buf, s.data(), n);
      buf[n] = '\0';
    }
  });
}

chq_status chq_config_hash(const chq_config* c, char out[17]) {
  CHQ_NONNULL(c);
  CHQ_NONNULL(out);
  return guarded([&] {
    const std::string h = chq::config_hash(c->builder.build());
    std::memcpy(out, h.c_str(), 17);
  });
}

size_t chq_config_key_count(void) { return chq::ConfigBuilder::keys().size(); }

const char* chq_config_key(size_t i) {
  const auto& k = chq::ConfigBuilder::keys();
  return i < k.size() ? k[i].c_str() : nullptr;
}

chq_status chq_run(const chq_config* c, int* exit_code) {
  CHQ_NONNULL(c);
  CHQ_NONNULL(exit_code);
  *exit_code = chq::exit_runtime_error;
  return guarded([&] { *exit_code = chq::run_command(c->builder.build(), std::cerr); });
}

chq_status chq_field_create(uint64_t n, double L, const double* data, chq_field** out) {
  CHQ_NONNULL(out);
  *out = nullptr;
  return guarded([&] {
    chq::require(n <= 1024, chq::ErrorCode::invalid_argument, "n must be at most 1024");
    chq::ComplexField f(chq::make_grid(static_cast<int>(n), L));
    if (data)
      for (std::size_t i = 0; i < f.size(); ++i) f[i] = chq::cplx(data[2 * i], data[2 * i + 1]);
    *out = new chq_field{std::move(f)};
  });
}

void chq_field_destroy(chq_field* f) { delete f; }

chq_status chq_field_read(const char* path, chq_field** out) {
  CHQ_NONNULL(path);
  CHQ_NONNULL(out);
  *out = nullptr;
  return guarded([&] { *out = new chq_field{chq::read_field(path)}; });
}

chq_status chq_field_write(const chq_field* f, const char* path) {
  CHQ_NONNULL(f);
  CHQ_NONNULL(path);
  return guarded([&] { chq::write_field(path, f->field); });
}

chq_status chq_field_shape(const chq_field* f, uint64_t* n, double* L) {
  CHQ_NONNULL(f);
  if (n) *n = static_cast<uint64_t>(f->field.grid().n());
  if (L) *L = f->field.grid().half_width();
  last_error.clear();
  return CHQ_OK;
}

chq_status chq_field_copy_data(const chq_field* f, double* data, size_t count) {
  CHQ_NONNULL(f);
  CHQ_NONNULL(data);
  if (count < 2 * f->field.size())
    return record(CHQ_ERR_INVALID_ARGUMENT, "buffer holds " + std::to_string(count) + " doubles, need " +
                                                std::to_string(2 * f->field.size()));
  for (std::size_t i = 0; i < f->field.size(); ++i) {
    data[2 * i] = f->field[i].real();
    data[2 * i + 1] = f->field[i].imag();
  }
  last_error.clear();
  return CHQ_OK;
}

chq_status chq_field_functionals(const chq_field* f, const chq_config* c, chq_functionals* out) {
  CHQ_NONNULL(f);
  CHQ_NONNULL(c);
  CHQ_NONNULL(out);
  return guarded([&] {
    const chq::ExperimentConfig cfg = c->builder.build();
    const chq::FunctionalReport r =
        chq::functional_report(f->field, cfg.potential_spec(), chq::ModelParams{cfg.omega, cfg.mu, cfg.p});
    *out = chq_functionals{r.E, r.Q, r.S_omega, r.I_omega, r.P, r.F_mu, r.grad_sq, r.pot_term, r.x_norm_sq};
  });
}

chq_status chq_ground_state(const chq_config* c, chq_field** phi, double* residual, int* converged) {
  CHQ_NONNULL(c);
  CHQ_NONNULL(phi);
  *phi = nullptr;
  return guarded([&] {
    const chq::ExperimentConfig cfg = c->builder.build();
    chq::SolverOptions o;
    o.tol = cfg.tol;
    o.max_iter = cfg.max_iter;
    chq::GroundStateResult gs = chq::solve_ground_state(cfg.potential_spec(), chq::ModelParams{cfg.omega, cfg.mu, cfg.p},
                                                        chq::make_grid(cfg.grid_n, cfg.box_l), o);
    if (residual) *residual = gs.residual;
    if (converged) *converged = gs.converged ? 1 : 0;
    *phi = new chq_field{std::move(gs.phi)};
  });
}

}  // extern "C"
