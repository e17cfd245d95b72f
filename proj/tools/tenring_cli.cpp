#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tenring/tenring.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitAborted = 3;

struct CliFailure {
  int code;
  std::string message;
};

void check(tr_status s, const std::string& context) {
  if (s == TR_OK) return;
  throw CliFailure{s == TR_ERR_SOLVER_ABORTED ? kExitAborted : kExitBadInput,
                   context + ": " + tr_last_error() + " [" + tr_status_name(s) + "]"};
}

struct TensorDeleter {
  void operator()(tr_tensor* t) const { tr_tensor_free(t); }
};
struct ConfigDeleter {
  void operator()(tr_config* c) const { tr_config_free(c); }
};
struct ResultDeleter {
  void operator()(tr_result* r) const { tr_result_free(r); }
};
struct RocDeleter {
  void operator()(tr_roc* r) const { tr_roc_free(r); }
};
struct StringDeleter {
  void operator()(char* s) const { tr_string_free(s); }
};
using TensorPtr = std::unique_ptr<tr_tensor, TensorDeleter>;
using ConfigPtr = std::unique_ptr<tr_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<tr_result, ResultDeleter>;
using RocPtr = std::unique_ptr<tr_roc, RocDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

TensorPtr read_tensor(const std::string& path) {
  tr_tensor* t = nullptr;
  check(tr_tensor_read(path.c_str(), &t), "reading " + path);
  return TensorPtr(t);
}

void write_tensor(const tr_tensor* t, const fs::path& path) {
  check(tr_tensor_write(t, path.string().c_str()), "writing " + path.string());
}

void write_text(const fs::path& path, const std::string& text) {
  check(tr_write_text_atomic(path.string().c_str(), text.c_str()), "writing " + path.string());
}

std::string now_iso() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json config_to_json(const tr_config* c) {
  char* raw = nullptr;
  check(tr_config_to_json(c, &raw), "serializing config");
  StringPtr s(raw);
  return json::parse(s.get());
}

json report_json(const tr_auc_report& r) {
  json j = {{"auc_pd_pf", r.auc_pd_pf}, {"auc_pd_tau", r.auc_pd_tau}, {"auc_pf_tau", r.auc_pf_tau},
            {"odp", r.odp},             {"snpr", r.snpr},             {"tdbs", r.tdbs}};
  j["snpr_degenerate"] = r.snpr_degenerate != 0;
  return j;
}

json box_json(const tr_box& b) {
  return {{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3}, {"max", b.max}};
}

// Solver flags mirror the config keys one-to-one.
struct ConfigFlags {
  std::string config_file;
  std::vector<std::string> raw = std::vector<std::string>(kKeys.size());

  static constexpr std::array<const char*, 20> kKeys = {
      "alpha",     "beta",      "ranks",   "phi",      "phi.p",        "phi.theta", "phi.eta",
      "phi.cap",   "psi",       "psi.p",   "psi.theta", "psi.eta",     "psi.cap",   "transform",
      "gamma_set", "mu0",       "mu_max",  "growth",   "tol",          "residual_tol"};

  std::string max_iter, seed, mode;

  void add(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config (as written in a manifest) applied before flags");
    for (std::size_t i = 0; i < kKeys.size(); ++i) {
      std::string flag = "--" + std::string(kKeys[i]);
      std::replace(flag.begin(), flag.end(), '_', '-');
      std::replace(flag.begin() + 2, flag.end(), '.', '-');
      app->add_option(flag, raw[i], std::string("solver ") + kKeys[i]);
    }
    app->add_option("--max-iter", max_iter, "solver max_iter");
    app->add_option("--seed", seed, "solver seed");
    app->add_option("--mode", mode, "euntrfr | untrfr | gntctv-direct | egntctv-direct | gnctv-unfold");
  }

  ConfigPtr build(bool skip_penalty = false) const {
    tr_config* c = nullptr;
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw CliFailure{kExitBadInput, "cannot open config " + config_file};
      std::stringstream ss;
      ss << in.rdbuf();
      json j;
      try {
        j = json::parse(ss.str());
      } catch (const json::exception& e) {
        throw CliFailure{kExitBadInput, "config " + config_file + ": " + e.what()};
      }
      if (j.contains("config")) j = j["config"];
      check(tr_config_from_json(j.dump().c_str(), &c), "config " + config_file);
    } else {
      check(tr_config_create(&c), "config");
    }
    ConfigPtr cfg(c);
    auto set = [&](const std::string& key, const std::string& value) {
      if (value.empty()) return;
      check(tr_config_set(cfg.get(), key.c_str(), value.c_str()), "--" + key);
    };
    for (std::size_t i = 0; i < kKeys.size(); ++i) {
      if (skip_penalty && (std::string(kKeys[i]) == "phi" || std::string(kKeys[i]) == "psi")) continue;
      set(kKeys[i], raw[i]);
    }
    set("max_iter", max_iter);
    set("seed", seed);
    set("mode", mode);
    return cfg;
  }
};

TensorPtr prepare_input(const std::string& path, bool normalize) {
  TensorPtr m = read_tensor(path);
  if (!normalize) return m;
  tr_tensor* n = nullptr;
  check(tr_tensor_band_normalize(m.get(), &n), "normalizing " + path);
  return TensorPtr(n);
}

struct Evaluation {
  tr_auc_report report{};
  tr_separability separability{};
  RocPtr roc;
};

Evaluation evaluate(const tr_tensor* map, const tr_tensor* mask) {
  Evaluation e;
  tr_roc* roc = nullptr;
  check(tr_evaluate(map, mask, &e.report, &e.separability, &roc), "evaluating detection map");
  e.roc.reset(roc);
  return e;
}

std::string roc_csv(const tr_roc* roc) {
  char* raw = nullptr;
  check(tr_roc_to_csv(roc, &raw), "roc csv");
  StringPtr s(raw);
  return s.get();
}

// ---- detect ---------------------------------------------------------------

struct DetectArgs {
  std::string input, mask, out_dir = ".";
  bool no_normalize = false;
  bool progress = false;
  ConfigFlags flags;
};

int run_detect(const DetectArgs& a) {
  const std::string started = now_iso();
  const auto t0 = std::chrono::steady_clock::now();
  ConfigPtr cfg = a.flags.build();
  check(tr_config_validate(cfg.get()), "config");
  TensorPtr m = prepare_input(a.input, !a.no_normalize);
  TensorPtr mask = a.mask.empty() ? nullptr : read_tensor(a.mask);

  const fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliFailure{kExitBadInput, "cannot create output directory " + dir.string()};

  tr_progress_fn cb = nullptr;
  if (a.progress)
    cb = [](const tr_iteration* r, void*) {
      std::fprintf(stderr, "iter %d error %.3e fidelity %.3e gradient %.3e mu %.3e\n", r->iteration, r->error,
                   r->fidelity_residual, r->gradient_residual, r->mu);
    };
  tr_result* raw = nullptr;
  const tr_status s = tr_solve(m.get(), cfg.get(), cb, nullptr, &raw);
  ResultPtr result(raw);
  const std::string solve_error = s == TR_OK ? "" : tr_last_error();

  json manifest;
  manifest["tool"] = {{"name", "tenring"}, {"version", tr_version()}};
  manifest["config"] = config_to_json(cfg.get());
  manifest["input"] = a.input;
  manifest["mask"] = a.mask.empty() ? json(nullptr) : json(a.mask);
  manifest["normalize"] = !a.no_normalize;
  manifest["threads"] = tr_get_threads();
  manifest["started"] = started;

  json trace;
  const std::size_t iters = tr_result_iterations(result.get());
  trace["iterations"] = iters;
  trace["converged"] = tr_result_converged(result.get()) != 0;
  if (iters > 0) {
    tr_iteration last{};
    check(tr_result_trace(result.get(), iters - 1, &last), "trace");
    trace["final_error"] = last.error;
    trace["fidelity_residual"] = last.fidelity_residual;
    trace["gradient_residual"] = last.gradient_residual;
    trace["final_mu"] = last.mu;
  }

  if (s != TR_OK) {
    if (s != TR_ERR_SOLVER_ABORTED) check(s, "solve");
    manifest["status"] = "aborted";
    manifest["error"] = solve_error;
    trace["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest["trace"] = trace;
    manifest["finished"] = now_iso();
    write_text(dir / "manifest.json", manifest.dump(2) + "\n");
    throw CliFailure{kExitAborted, "solver aborted: " + solve_error};
  }

  json outputs = {{"map", (dir / "map.tns").string()},
                  {"background", (dir / "background.tns").string()},
                  {"anomaly", (dir / "anomaly.tns").string()}};
  write_tensor(tr_result_map(result.get()), dir / "map.tns");
  write_tensor(tr_result_background(result.get()), dir / "background.tns");
  write_tensor(tr_result_anomaly(result.get()), dir / "anomaly.tns");

  if (mask) {
    Evaluation e = evaluate(tr_result_map(result.get()), mask.get());
    json report = report_json(e.report);
    write_text(dir / "report.json", report.dump(2) + "\n");
    write_text(dir / "roc.csv", roc_csv(e.roc.get()));
    outputs["report"] = (dir / "report.json").string();
    outputs["roc"] = (dir / "roc.csv").string();
    manifest["report"] = report;
    std::printf("auc_pd_pf %.6f\n", e.report.auc_pd_pf);
  }
  trace["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["trace"] = trace;
  manifest["outputs"] = outputs;
  manifest["status"] = "ok";
  manifest["finished"] = now_iso();
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  std::printf("iterations %zu converged %s\n", iters, tr_result_converged(result.get()) ? "yes" : "no");
  return kExitOk;
}

// ---- sweep ----------------------------------------------------------------

const std::vector<std::string> kPaperGrid = {"1e-6", "5e-6", "1e-5", "5e-5", "1e-4", "5e-4", "1e-3", "5e-3",
                                             "1e-2", "5e-2", "0.1",  "0.5",  "1",    "5",    "10"};

struct SweepArgs {
  std::string input, mask, output = "sweep.csv";
  std::vector<std::string> alphas, betas, penalties, ranks;
  bool paper_grid = false, resume = false, no_normalize = false;
  ConfigFlags flags;
};

struct SweepRow {
  std::string alpha, beta, penalty, ranks;
  std::string key() const { return alpha + "," + beta + "," + penalty + "," + ranks; }
};

const char* kSweepHeader = "alpha,beta,penalty,ranks,auc_pd_pf,auc_pd_tau,auc_pf_tau,odp,snpr,tdbs,iterations,converged,status";

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) out.push_back(item);
  return out;
}

std::vector<std::string> sorted_numeric(std::vector<std::string> v, const char* what) {
  for (const auto& s : v) {
    try {
      std::size_t used = 0;
      (void)std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw CliFailure{kExitBadInput, std::string("invalid ") + what + " grid token '" + s + "'"};
    }
  }
  std::stable_sort(v.begin(), v.end(), [](const std::string& a, const std::string& b) { return std::stod(a) < std::stod(b); });
  return v;
}

int run_sweep(SweepArgs a) {
  if (a.paper_grid) {
    if (a.alphas.empty()) a.alphas = kPaperGrid;
    if (a.betas.empty()) a.betas = kPaperGrid;
  }
  ConfigPtr base = a.flags.build(true);
  json base_json = config_to_json(base.get());
  auto default_of = [&](const char* key) {
    const json& v = base_json[key];
    return v.is_string() ? v.get<std::string>() : fmt(v.get<double>());
  };
  if (a.alphas.empty()) a.alphas = {default_of("alpha")};
  if (a.betas.empty()) a.betas = {default_of("beta")};
  if (a.penalties.empty()) a.penalties = {base_json["phi"]["kind"].get<std::string>()};
  if (a.ranks.empty()) {
    const auto& r = base_json["ranks"];
    a.ranks = {std::to_string(r[0].get<int>()) + "x" + std::to_string(r[1].get<int>()) + "x" +
               std::to_string(r[2].get<int>())};
  }
  a.alphas = sorted_numeric(a.alphas, "alpha");
  a.betas = sorted_numeric(a.betas, "beta");
  std::sort(a.penalties.begin(), a.penalties.end());
  for (auto& r : a.ranks) {
    std::replace(r.begin(), r.end(), ',', 'x');
    if (split(r, 'x').size() != 3) throw CliFailure{kExitBadInput, "invalid ranks grid token '" + r + "'"};
  }
  std::sort(a.ranks.begin(), a.ranks.end());

  std::vector<SweepRow> rows;
  for (const auto& al : a.alphas)
    for (const auto& be : a.betas)
      for (const auto& pe : a.penalties)
        for (const auto& ra : a.ranks) rows.push_back({al, be, pe, ra});

  // Validate every row's config before any solve starts.
  auto row_config = [&](const SweepRow& r) {
    ConfigPtr c = a.flags.build(true);
    std::string ranks = r.ranks;
    std::replace(ranks.begin(), ranks.end(), 'x', ',');
    check(tr_config_set(c.get(), "alpha", r.alpha.c_str()), "alpha grid");
    check(tr_config_set(c.get(), "beta", r.beta.c_str()), "beta grid");
    check(tr_config_set(c.get(), "phi", r.penalty.c_str()), "penalty grid");
    check(tr_config_set(c.get(), "psi", r.penalty.c_str()), "penalty grid");
    check(tr_config_set(c.get(), "ranks", ranks.c_str()), "ranks grid");
    check(tr_config_validate(c.get()), "grid row " + r.key());
    return c;
  };
  for (const auto& r : rows) (void)row_config(r);

  std::vector<std::string> lines(rows.size());
  std::size_t done = 0;
  if (a.resume && fs::exists(a.output)) {
    std::ifstream in(a.output);
    std::string line;
    std::getline(in, line);
    if (line != kSweepHeader) throw CliFailure{kExitBadInput, a.output + ": not a sweep file with the expected header"};
    while (std::getline(in, line) && done < rows.size()) {
      if (line.empty()) continue;
      const auto cells = split(line, ',');
      if (cells.size() < 4 || cells[0] + "," + cells[1] + "," + cells[2] + "," + cells[3] != rows[done].key())
        throw CliFailure{kExitBadInput, a.output + ": existing rows do not match this grid"};
      lines[done++] = line;
    }
  }

  TensorPtr m = prepare_input(a.input, !a.no_normalize);
  TensorPtr mask = read_tensor(a.mask);

  const std::size_t workers = std::max<std::size_t>(1, std::min(tr_get_threads(), rows.size() - done));
  if (workers > 1) tr_set_threads(1);

  std::mutex mu;
  std::vector<char> finished(rows.size(), 0);
  for (std::size_t i = 0; i < done; ++i) finished[i] = 1;
  std::size_t flushed = done;
  std::optional<CliFailure> failure;
  std::atomic<std::size_t> next{done};

  auto flush = [&] {
    std::string text = std::string(kSweepHeader) + "\n";
    for (std::size_t i = 0; i < flushed; ++i) text += lines[i] + "\n";
    write_text(a.output, text);
  };

  auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        const SweepRow& r = rows[i];
        ConfigPtr c = row_config(r);
        tr_result* raw = nullptr;
        const tr_status s = tr_solve(m.get(), c.get(), nullptr, nullptr, &raw);
        ResultPtr res(raw);
        std::string line = r.key() + ",";
        if (s == TR_OK) {
          Evaluation e = evaluate(tr_result_map(res.get()), mask.get());
          const tr_auc_report& q = e.report;
          line += fmt(q.auc_pd_pf) + "," + fmt(q.auc_pd_tau) + "," + fmt(q.auc_pf_tau) + "," + fmt(q.odp) + "," +
                  fmt(q.snpr) + "," + fmt(q.tdbs) + "," + std::to_string(tr_result_iterations(res.get())) + "," +
                  (tr_result_converged(res.get()) ? "1" : "0") + ",ok";
        } else if (s == TR_ERR_SOLVER_ABORTED) {
          line += "nan,nan,nan,nan,nan,nan," + std::to_string(tr_result_iterations(res.get())) + ",0,aborted";
        } else {
          check(s, "row " + r.key());
        }
        std::lock_guard lock(mu);
        lines[i] = std::move(line);
        finished[i] = 1;
        while (flushed < rows.size() && finished[flushed]) ++flushed;
        flush();
      } catch (const CliFailure& f) {
        std::lock_guard lock(mu);
        if (!failure) failure = f;
        next = rows.size();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) throw *failure;
  if (done == rows.size()) flush();
  std::printf("%zu rows written to %s\n", rows.size(), a.output.c_str());
  return kExitOk;
}

// ---- synth / metrics / info -------------------------------------------------

struct SynthArgs {
  std::string out = "scene.tns", mask_out = "mask.tns", dims = "30,30,20", ranks = "3,6,3";
  std::size_t anomalies = 8;
  double strength = 2.0, noise = 0.01;
  std::uint64_t seed = 0;
};

std::vector<std::size_t> parse_triple(const std::string& s, const char* what) {
  const auto parts = split(s, ',');
  std::vector<std::size_t> out;
  for (const auto& p : parts) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(p, &used);
      if (used != p.size()) throw std::invalid_argument(p);
      out.push_back(std::size_t(v));
    } catch (const std::exception&) {
      throw CliFailure{kExitBadInput, std::string("invalid ") + what + " '" + s + "'"};
    }
  }
  if (out.size() != 3) throw CliFailure{kExitBadInput, std::string(what) + " needs three comma-separated values"};
  return out;
}

int run_synth(const SynthArgs& a) {
  const auto d = parse_triple(a.dims, "dims");
  const auto r = parse_triple(a.ranks, "ranks");
  tr_tensor *scene = nullptr, *mask = nullptr;
  check(tr_synth(d[0], d[1], d[2], r[0], r[1], r[2], a.anomalies, a.strength, a.noise, a.seed, &scene, &mask),
        "synth");
  TensorPtr s(scene), m(mask);
  write_tensor(s.get(), a.out);
  write_tensor(m.get(), a.mask_out);
  std::printf("wrote %s and %s\n", a.out.c_str(), a.mask_out.c_str());
  return kExitOk;
}

struct MetricsArgs {
  std::string map, mask, json_out, roc_out;
};

int run_metrics(const MetricsArgs& a) {
  TensorPtr map = read_tensor(a.map);
  TensorPtr mask = read_tensor(a.mask);
  Evaluation e = evaluate(map.get(), mask.get());
  json j = report_json(e.report);
  j["separability"] = {{"anomaly", box_json(e.separability.anomaly)},
                       {"background", box_json(e.separability.background)},
                       {"gap", e.separability.gap}};
  const std::string text = j.dump(2) + "\n";
  if (a.json_out.empty()) std::fputs(text.c_str(), stdout);
  else write_text(a.json_out, text);
  if (!a.roc_out.empty()) write_text(a.roc_out, roc_csv(e.roc.get()));
  return kExitOk;
}

int run_info(const std::string& path) {
  TensorPtr t = read_tensor(path);
  std::size_t d[3];
  tr_tensor_dims(t.get(), d);
  const double* v = tr_tensor_data(t.get());
  const std::size_t n = d[0] * d[1] * d[2];
  double lo = v[0], hi = v[0], sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
    sum += v[i];
  }
  std::printf("path %s\nformat TNS3 v1\ndims %zu %zu %zu\nvalues %zu\nmin %s\nmax %s\nmean %s\n", path.c_str(), d[0],
              d[1], d[2], n, fmt(lo).c_str(), fmt(hi).c_str(), fmt(sum / double(n)).c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor-ring hyperspectral anomaly detector"};
  app.require_subcommand(1);
  std::size_t threads = 0;
  app.add_option("--threads", threads, "worker threads (default: TENRING_THREADS or hardware)");

  DetectArgs detect;
  auto* d = app.add_subcommand("detect", "run the detector on a tensor");
  d->add_option("--input,-i", detect.input, "input tensor (TNS3)")->required();
  d->add_option("--mask", detect.mask, "ground-truth mask (n1 x n2 x 1) for evaluation");
  d->add_option("--out-dir,-o", detect.out_dir, "output directory");
  d->add_flag("--no-normalize", detect.no_normalize, "skip per-band min-max scaling of the input");
  d->add_flag("--progress", detect.progress, "print one line per iteration to stderr");
  detect.flags.add(d);

  SweepArgs sweep;
  auto* s = app.add_subcommand("sweep", "grid search over alpha, beta, penalty and ranks");
  s->add_option("--input,-i", sweep.input, "input tensor")->required();
  s->add_option("--mask", sweep.mask, "ground-truth mask")->required();
  s->add_option("--output,-o", sweep.output, "CSV output");
  s->add_option("--alphas", sweep.alphas, "alpha values")->delimiter(',');
  s->add_option("--betas", sweep.betas, "beta values")->delimiter(',');
  s->add_option("--penalties", sweep.penalties, "penalty names (used for phi and psi)")->delimiter(',');
  s->add_option("--rank-grid", sweep.ranks, "rank triples such as 6x16x6");
  s->add_flag("--paper-grid", sweep.paper_grid, "use the 15-value grid for alpha and beta");
  s->add_flag("--resume", sweep.resume, "keep completed rows of an existing output");
  s->add_flag("--no-normalize", sweep.no_normalize, "skip per-band min-max scaling of the input");
  sweep.flags.add(s);

  SynthArgs synth;
  auto* y = app.add_subcommand("synth", "generate a synthetic scene and mask");
  y->add_option("--out,-o", synth.out, "scene output");
  y->add_option("--mask-out", synth.mask_out, "mask output");
  y->add_option("--dims", synth.dims, "n1,n2,n3");
  y->add_option("--ranks", synth.ranks, "r1,r2,r3");
  y->add_option("--anomalies", synth.anomalies, "planted anomalous pixels");
  y->add_option("--strength", synth.strength, "anomaly strength relative to the local tube norm");
  y->add_option("--noise", synth.noise, "Gaussian noise sigma");
  y->add_option("--seed", synth.seed, "seed");

  MetricsArgs metrics;
  auto* m = app.add_subcommand("metrics", "evaluate a detection map against a mask");
  m->add_option("--map", metrics.map, "detection map (n1 x n2 x 1)")->required();
  m->add_option("--mask", metrics.mask, "ground-truth mask")->required();
  m->add_option("--json", metrics.json_out, "report output (default stdout)");
  m->add_option("--roc", metrics.roc_out, "ROC CSV output");

  std::string info_path;
  auto* inf = app.add_subcommand("info", "print a tensor file header summary");
  inf->add_option("path", info_path, "tensor file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitBadInput;
  }

  try {
    if (threads > 0) tr_set_threads(threads);
    if (d->parsed()) return run_detect(detect);
    if (s->parsed()) return run_sweep(sweep);
    if (y->parsed()) return run_synth(synth);
    if (m->parsed()) return run_metrics(metrics);
    if (inf->parsed()) return run_info(info_path);
  } catch (const CliFailure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  }
  return kExitBadInput;
}
