#include "tenring/tenring.h"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <new>
#include <memory>

#include <json.hpp>

#include "tenring/dataio.hpp"
#include "tenring/metrics.hpp"
#include "tenring/parallel.hpp"
#include "tenring/solver.hpp"

using namespace tenring;
using json = nlohmann::json;

struct tr_tensor {
  Tensor3 t;
};

struct PenaltyParams {
  PenaltyKind kind = PenaltyKind::capped_log;
  double p = 0.5;
  double theta = 1.0;
  double eta = 2.0;
  double cap = 1.0;

  PenaltySpec build() const { return PenaltySpec::make(kind, p, theta, eta, cap); }
};

// Penalty parameters stay unvalidated until the config is used, so keys can
// be set in any order.
struct tr_config {
  SolverConfig base;
  PenaltyParams phi;
  PenaltyParams psi;

  SolverConfig build() const {
    SolverConfig c = base;
    c.phi = phi.build();
    c.psi = psi.build();
    c.validate();
    return c;
  }
};

struct tr_result {
  tr_tensor background;
  tr_tensor anomaly;
  tr_tensor map;
  std::vector<IterationRecord> trace;
  bool converged = false;
};

struct tr_roc {
  RocCurve curve;
};

namespace {

thread_local std::string g_last_error;

tr_status record(tr_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <typename F>
tr_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return TR_OK;
  } catch (const Error& e) {
    return record(tr_status(int(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return record(TR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return record(TR_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail(ErrorCode::invalid_argument, std::string(key) + ": expected a number, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    fail(ErrorCode::invalid_argument, std::string(key) + ": expected a nonnegative integer, got '" + std::string(v) + "'");
  return out;
}

std::vector<std::uint64_t> parse_uint_list(std::string_view key, std::string_view v) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = v.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? v.size() : comma;
    out.push_back(parse_uint(key, v.substr(start, end - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool set_penalty_field(PenaltyParams& pp, std::string_view field, std::string_view key, std::string_view v) {
  if (field.empty()) pp.kind = parse_penalty_kind(v);
  else if (field == ".p") pp.p = parse_double(key, v);
  else if (field == ".theta") pp.theta = parse_double(key, v);
  else if (field == ".eta") pp.eta = parse_double(key, v);
  else if (field == ".cap") pp.cap = parse_double(key, v);
  else return false;
  return true;
}

void set_key(tr_config& c, std::string_view key, std::string_view v) {
  SolverConfig& b = c.base;
  if (key == "alpha") b.alpha = parse_double(key, v);
  else if (key == "beta") b.beta = parse_double(key, v);
  else if (key == "ranks") {
    const auto r = parse_uint_list(key, v);
    if (r.size() != 3) fail(ErrorCode::invalid_argument, "ranks: expected three comma-separated values");
    b.ranks = {r[0], r[1], r[2]};
  } else if (key.starts_with("phi") && set_penalty_field(c.phi, key.substr(3), key, v)) {
  } else if (key.starts_with("psi") && set_penalty_field(c.psi, key.substr(3), key, v)) {
  } else if (key == "transform") b.transform = parse_transform_kind(v);
  else if (key == "gamma_set") {
    b.gamma_set.clear();
    for (auto k : parse_uint_list(key, v)) b.gamma_set.push_back(int(std::min<std::uint64_t>(k, 1000)));
  } else if (key == "mu0") b.mu0 = parse_double(key, v);
  else if (key == "mu_max") b.mu_max = parse_double(key, v);
  else if (key == "growth") b.growth = parse_double(key, v);
  else if (key == "tol") b.tol = parse_double(key, v);
  else if (key == "residual_tol") b.residual_tol = parse_double(key, v);
  else if (key == "max_iter") b.max_iter = int(std::min<std::uint64_t>(parse_uint(key, v), 1u << 30));
  else if (key == "seed") b.seed = parse_uint(key, v);
  else if (key == "mode") b.mode = parse_regularizer_mode(v);
  else fail(ErrorCode::invalid_argument, "unknown config key '" + std::string(key) + "'");
}

json penalty_json(const PenaltyParams& p) {
  return {{"kind", to_string(p.kind)}, {"p", p.p}, {"theta", p.theta}, {"eta", p.eta}, {"cap", p.cap}};
}

PenaltyParams penalty_from_json(const json& j) {
  PenaltyParams p;
  p.kind = parse_penalty_kind(j.at("kind").get<std::string>());
  p.p = j.at("p").get<double>();
  p.theta = j.at("theta").get<double>();
  p.eta = j.at("eta").get<double>();
  p.cap = j.at("cap").get<double>();
  return p;
}

json config_json(const tr_config& c) {
  const SolverConfig& b = c.base;
  return {{"alpha", b.alpha},
          {"beta", b.beta},
          {"ranks", {b.ranks.r1, b.ranks.r2, b.ranks.r3}},
          {"phi", penalty_json(c.phi)},
          {"psi", penalty_json(c.psi)},
          {"transform", to_string(b.transform)},
          {"gamma_set", b.gamma_set},
          {"mu0", b.mu0},
          {"mu_max", b.mu_max},
          {"growth", b.growth},
          {"tol", b.tol},
          {"residual_tol", b.residual_tol},
          {"max_iter", b.max_iter},
          {"seed", b.seed},
          {"mode", to_string(b.mode)}};
}

tr_config config_from_json(const json& j) {
  tr_config c;
  SolverConfig& b = c.base;
  b.alpha = j.at("alpha").get<double>();
  b.beta = j.at("beta").get<double>();
  const auto r = j.at("ranks").get<std::vector<std::size_t>>();
  if (r.size() != 3) fail(ErrorCode::invalid_argument, "ranks: expected three values");
  b.ranks = {r[0], r[1], r[2]};
  c.phi = penalty_from_json(j.at("phi"));
  c.psi = penalty_from_json(j.at("psi"));
  b.transform = parse_transform_kind(j.at("transform").get<std::string>());
  b.gamma_set = j.at("gamma_set").get<std::vector<int>>();
  b.mu0 = j.at("mu0").get<double>();
  b.mu_max = j.at("mu_max").get<double>();
  b.growth = j.at("growth").get<double>();
  b.tol = j.at("tol").get<double>();
  b.residual_tol = j.at("residual_tol").get<double>();
  b.max_iter = j.at("max_iter").get<int>();
  b.seed = j.at("seed").get<std::uint64_t>();
  b.mode = parse_regularizer_mode(j.at("mode").get<std::string>());
  return c;
}

tr_iteration to_c(const IterationRecord& r) {
  return {r.iteration, r.error, r.fidelity_residual, r.gradient_residual, r.mu, r.regularized ? 1 : 0};
}

Tensor3 map_tensor(const Matrix& m) {
  return Tensor3({std::size_t(m.rows()), std::size_t(m.cols()), 1},
                 std::vector<double>(m.data(), m.data() + m.size()));
}

Matrix plane(const Tensor3& t, const char* what) {
  if (t.dims().n3 != 1) fail(ErrorCode::dimension_mismatch, std::string(what) + " must have n3 == 1");
  return Eigen::Map<const Matrix>(t.values().data(), Eigen::Index(t.dims().n1), Eigen::Index(t.dims().n2));
}

tr_box to_c(const BoxSummary& b) { return {b.min, b.q1, b.median, b.q3, b.max}; }

}  // namespace

extern "C" {

const char* tr_last_error(void) { return g_last_error.c_str(); }

const char* tr_version(void) { return "0.1.0"; }

const char* tr_status_name(tr_status status) {
  switch (status) {
    case TR_OK: return "ok";
    case TR_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case TR_ERR_DIMENSION_MISMATCH: return "dimension_mismatch";
    case TR_ERR_IO: return "io";
    case TR_ERR_BAD_MAGIC: return "bad_magic";
    case TR_ERR_TRUNCATED: return "truncated";
    case TR_ERR_VERSION_MISMATCH: return "version_mismatch";
    case TR_ERR_NON_FINITE: return "non_finite";
    case TR_ERR_SOLVER_ABORTED: return "solver_aborted";
    case TR_ERR_NUMERICAL: return "numerical";
    case TR_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void tr_set_threads(size_t n) { set_worker_count(n); }
size_t tr_get_threads(void) { return worker_count(); }
void tr_string_free(char* s) { std::free(s); }

tr_status tr_tensor_create(size_t n1, size_t n2, size_t n3, const double* data, tr_tensor** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    const Dims3 d{n1, n2, n3};
    if (n1 == 0 || n2 == 0 || n3 == 0) fail(ErrorCode::invalid_argument, "tensor extents must be positive");
    if (d.volume() / n1 / n2 != n3) fail(ErrorCode::invalid_argument, "tensor extents overflow");
    Tensor3 t = data ? Tensor3(d, std::vector<double>(data, data + d.volume())) : Tensor3(d);
    *out = new tr_tensor{std::move(t)};
  });
}

void tr_tensor_free(tr_tensor* t) { delete t; }

void tr_tensor_dims(const tr_tensor* t, size_t dims[3]) {
  if (!t || !dims) return;
  dims[0] = t->t.dims().n1;
  dims[1] = t->t.dims().n2;
  dims[2] = t->t.dims().n3;
}

const double* tr_tensor_data(const tr_tensor* t) { return t ? t->t.values().data() : nullptr; }

tr_status tr_tensor_read(const char* path, tr_tensor** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new tr_tensor{read_tensor(path)};
  });
}

tr_status tr_tensor_write(const tr_tensor* t, const char* path) {
  return guarded([&] {
    need(t, "tensor");
    need(path, "path");
    write_tensor(path, t->t);
  });
}

tr_status tr_tensor_band_normalize(const tr_tensor* t, tr_tensor** out) {
  return guarded([&] {
    need(t, "tensor");
    need(out, "out");
    *out = nullptr;
    *out = new tr_tensor{band_normalize(t->t)};
  });
}

tr_status tr_config_create(tr_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new tr_config{};
  });
}

void tr_config_free(tr_config* c) { delete c; }

tr_status tr_config_set(tr_config* c, const char* key, const char* value) {
  return guarded([&] {
    need(c, "config");
    need(key, "key");
    need(value, "value");
    set_key(*c, key, value);
  });
}

tr_status tr_config_validate(const tr_config* c) {
  return guarded([&] {
    need(c, "config");
    (void)c->build();
  });
}

tr_status tr_config_to_json(const tr_config* c, char** out) {
  return guarded([&] {
    need(c, "config");
    need(out, "out");
    *out = dup_string(config_json(*c).dump(2));
  });
}

tr_status tr_config_from_json(const char* text, tr_config** out) {
  return guarded([&] {
    need(text, "json");
    need(out, "out");
    *out = nullptr;
    json j;
    try {
      j = json::parse(text);
      *out = new tr_config(config_from_json(j));
    } catch (const json::exception& e) {
      fail(ErrorCode::invalid_argument, std::string("config json: ") + e.what());
    }
  });
}

tr_status tr_solve(const tr_tensor* observed, const tr_config* config, tr_progress_fn progress, void* user,
                   tr_result** out) {
  return guarded([&] {
    need(observed, "observed");
    need(config, "config");
    need(out, "out");
    *out = nullptr;
    ProgressCallback cb;
    if (progress) cb = [&](const IterationRecord& r) {
      const tr_iteration rec = to_c(r);
      progress(&rec, user);
    };
    try {
      SolveOutput s = solve(observed->t, config->build(), cb);
      auto* r = new tr_result;
      r->background.t = std::move(s.background);
      r->anomaly.t = std::move(s.anomaly);
      r->map.t = map_tensor(s.detection_map);
      r->trace = std::move(s.trace);
      r->converged = s.converged;
      *out = r;
    } catch (const SolverAborted& e) {
      auto* r = new tr_result;
      r->trace = e.trace();
      *out = r;
      throw;
    }
  });
}

void tr_result_free(tr_result* r) { delete r; }
const tr_tensor* tr_result_background(const tr_result* r) { return r ? &r->background : nullptr; }
const tr_tensor* tr_result_anomaly(const tr_result* r) { return r ? &r->anomaly : nullptr; }
const tr_tensor* tr_result_map(const tr_result* r) { return r ? &r->map : nullptr; }
size_t tr_result_iterations(const tr_result* r) { return r ? r->trace.size() : 0; }
int tr_result_converged(const tr_result* r) { return r && r->converged ? 1 : 0; }

tr_status tr_result_trace(const tr_result* r, size_t index, tr_iteration* out) {
  return guarded([&] {
    need(r, "result");
    need(out, "out");
    if (index >= r->trace.size()) fail(ErrorCode::invalid_argument, "trace index out of range");
    *out = to_c(r->trace[index]);
  });
}

tr_status tr_evaluate(const tr_tensor* map, const tr_tensor* mask, tr_auc_report* report,
                      tr_separability* separability, tr_roc** roc) {
  return guarded([&] {
    need(map, "map");
    need(mask, "mask");
    need(report, "report");
    if (roc) *roc = nullptr;
    const Matrix scores = normalize_map(plane(map->t, "map"));
    const GroundTruthMask truth(plane(mask->t, "mask"));
    if (scores.rows() != truth.labels().rows() || scores.cols() != truth.labels().cols())
      fail(ErrorCode::dimension_mismatch, "map and mask sizes differ");
    RocCurve curve = roc3d(scores, truth);
    const AucReport a = auc_report(curve);
    *report = {a.auc_pd_pf, a.auc_pd_tau, a.auc_pf_tau, a.odp, a.snpr, a.tdbs, a.snpr_degenerate ? 1 : 0};
    if (separability) {
      const SeparabilityStats s = separability_stats(scores, truth);
      *separability = {to_c(s.anomaly), to_c(s.background), s.gap};
    }
    if (roc) *roc = new tr_roc{std::move(curve)};
  });
}

void tr_roc_free(tr_roc* roc) { delete roc; }
size_t tr_roc_size(const tr_roc* roc) { return roc ? roc->curve.samples.size() : 0; }

tr_status tr_roc_sample(const tr_roc* roc, size_t index, double* tau, double* pd, double* pf) {
  return guarded([&] {
    need(roc, "roc");
    if (index >= roc->curve.samples.size()) fail(ErrorCode::invalid_argument, "roc index out of range");
    const RocSample& s = roc->curve.samples[index];
    if (tau) *tau = s.tau;
    if (pd) *pd = s.pd;
    if (pf) *pf = s.pf;
  });
}

tr_status tr_roc_to_csv(const tr_roc* roc, char** out) {
  return guarded([&] {
    need(roc, "roc");
    need(out, "out");
    *out = dup_string(roc_to_csv(roc->curve));
  });
}

tr_status tr_synth(size_t n1, size_t n2, size_t n3, size_t r1, size_t r2, size_t r3, size_t anomalies,
                   double strength, double noise_sigma, uint64_t seed, tr_tensor** scene, tr_tensor** mask) {
  return guarded([&] {
    need(scene, "scene");
    need(mask, "mask");
    *scene = nullptr;
    *mask = nullptr;
    if (n1 == 0 || n2 == 0 || n3 == 0) fail(ErrorCode::invalid_argument, "tensor extents must be positive");
    if (r1 == 0 || r2 == 0 || r3 == 0) fail(ErrorCode::invalid_argument, "TR ranks must be positive");
    SyntheticScene s = generate_synthetic({n1, n2, n3}, {r1, r2, r3}, anomalies, strength, noise_sigma, seed);
    auto scene_handle = std::make_unique<tr_tensor>(tr_tensor{std::move(s.tensor)});
    *mask = new tr_tensor{map_tensor(s.mask.labels())};
    *scene = scene_handle.release();
  });
}

tr_status tr_write_text_atomic(const char* path, const char* contents) {
  return guarded([&] {
    need(path, "path");
    need(contents, "contents");
    write_file_atomic(path, contents);
  });
}

}  // extern "C"
