#include "rwlab/experiment.hpp"

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "rwlab/heavy_tail.hpp"
#include "rwlab/iic.hpp"
#include "rwlab/offspring.hpp"
#include "rwlab/parallel.hpp"
#include "rwlab/perc.hpp"
#include "rwlab/rwre1d.hpp"
#include "rwlab/seed_tree.hpp"
#include "rwlab/stats.hpp"
#include "rwlab/trap_model.hpp"
#include "rwlab/tree_walk.hpp"

namespace rwlab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kCodeVersion = "rwlab 1.0.0";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

struct Csv {
  std::string text;
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text += ',';
      text += cells[i];
    }
    text += '\n';
  }
};

struct RunOutput {
  std::vector<std::pair<std::string, std::string>> files;  // name -> bytes
  bool partial = false;
};

OffspringLaw pmf_from_json(const json& j) {
  std::vector<std::pair<int, double>> atoms;
  for (const auto& [k, v] : j.items())
    atoms.emplace_back(std::stoi(k), v.get<double>());
  return OffspringLaw::from_atoms(atoms);
}

SiteLaw site_law_from_json(const json& j) {
  std::vector<SiteLaw::Atom> atoms;
  for (const auto& a : j) atoms.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
  return SiteLaw(atoms);
}

std::vector<double> grid_from_json(const json& j) {
  std::vector<double> grid;
  if (j.is_array()) {
    for (const auto& v : j) grid.push_back(v.get<double>());
    return grid;
  }
  const double lo = j.at("from").get<double>();
  const double hi = j.at("to").get<double>();
  const double factor = j.value("factor", 0.0);
  if (factor > 1.0) {
    for (double t = lo; t <= hi * (1.0 + 1e-12); t *= factor) grid.push_back(t);
  } else {
    const double step = j.at("step").get<double>();
    for (double t = lo; t <= hi + 1e-12; t += step) grid.push_back(t);
  }
  return grid;
}

double beta_from_json(const json& j) {
  if (j.is_string() && (j.get<std::string>() == "inf" ||
                        j.get<std::string>() == "infinity"))
    return kTotallyDirected;
  return j.get<double>();
}

// ---- per-model experiment handlers ----------------------------------------

RunOutput run_btm(const json& params, const json& budget, SeedTree seeds,
                  unsigned workers) {
  const std::string experiment = params.at("experiment").get<std::string>();
  const std::size_t replicas = budget.at("replicas").get<std::size_t>();
  RunOutput out;
  Csv csv;

  if (experiment == "scaling") {
    const TailSpec tail(params.at("alpha").get<double>());
    const auto grid = grid_from_json(params.at("t_grid"));
    const auto res = scaling_exponent_btm(tail, beta_from_json(params.at("beta")),
                                          grid, replicas, seeds, workers);
    csv.row({"t", "median_x"});
    for (std::size_t i = 0; i < res.t_grid.size(); ++i)
      csv.row({fmt(res.t_grid[i]), fmt(res.median_x[i])});
    out.files.emplace_back("results.csv", csv.text);
    Csv summary;
    summary.row({"key", "value"});
    summary.row({"slope", fmt(res.slope.estimate)});
    summary.row({"ci_lo", fmt(res.slope.ci_lo)});
    summary.row({"ci_hi", fmt(res.slope.ci_hi)});
    summary.row({"replicas", std::to_string(replicas)});
    out.files.emplace_back("summary.csv", summary.text);
  } else if (experiment == "aging") {
    const TailSpec tail(params.at("alpha").get<double>());
    const double t = params.at("t").get<double>();
    const double beta = beta_from_json(params.at("beta"));
    csv.row({"ratio", "empirical", "arcsine", "std_error"});
    const auto ratios = grid_from_json(params.at("ratio_grid"));
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      const auto est = aging_probability(tail, beta, ratios[i], 1.0, t,
                                         replicas, seeds.child(i), workers);
      csv.row({fmt(ratios[i]), fmt(est.p_hat), fmt(est.arcsine_ref),
               fmt(est.std_error)});
    }
    out.files.emplace_back("results.csv", csv.text);
  } else if (experiment == "clock") {
    const TailSpec tail(params.at("alpha").get<double>());
    const auto n = params.at("n").get<std::size_t>();
    const auto res = clock_vs_stable(tail, tail.alpha, n, replicas, seeds,
                                     workers);
    csv.row({"key", "value"});
    csv.row({"ks", fmt(res.ks)});
    csv.row({"n", std::to_string(n)});
    csv.row({"replicas", std::to_string(replicas)});
    out.files.emplace_back("results.csv", csv.text);
  } else {
    throw std::invalid_argument("btm: unknown experiment " + experiment);
  }
  return out;
}

RunOutput run_rwre(const json& params, const json& budget, SeedTree seeds,
                   unsigned workers) {
  const std::string experiment = params.at("experiment").get<std::string>();
  const std::size_t replicas = budget.at("replicas").get<std::size_t>();
  const SiteLaw law = site_law_from_json(params.at("site_law"));
  RunOutput out;
  Csv csv;

  if (experiment == "speed") {
    const auto steps = budget.at("steps").get<std::int64_t>();
    auto xs = parallel_replicas<double>(
        replicas,
        [&](std::size_t r) {
          SeedTree rep = seeds.child(r);
          Env1D env(law, rep.child(0));
          Stream walk = rep.child(1).stream();
          return static_cast<double>(walk_position_after(env, steps, walk)) /
                 static_cast<double>(steps);
        },
        workers);
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    const auto regime = classify_regime(law);
    csv.row({"key", "value"});
    csv.row({"mean_speed", fmt(mean)});
    csv.row({"solomon_speed", fmt(regime.speed)});
    csv.row({"environments", std::to_string(replicas)});
    csv.row({"steps", std::to_string(steps)});
    out.files.emplace_back("results.csv", csv.text);
  } else if (experiment == "exponent") {
    const auto levels_d = grid_from_json(params.at("levels"));
    std::vector<std::int64_t> levels(levels_d.begin(), levels_d.end());
    const auto cap = budget.value("steps", std::int64_t{1'000'000'000});
    std::vector<std::vector<double>> rows;
    std::size_t dropped = 0;
    auto recs = parallel_replicas<std::vector<double>>(
        replicas,
        [&](std::size_t r) -> std::vector<double> {
          SeedTree rep = seeds.child(r);
          Env1D env(law, rep.child(0));
          Stream walk = rep.child(1).stream();
          const auto rec = simulate_rwre(env, levels.back(), walk, cap);
          if (rec.partial) return {};
          std::vector<double> row;
          for (auto l : levels)
            row.push_back(static_cast<double>(
                rec.delta[static_cast<std::size_t>(l) - 1]));
          return row;
        },
        workers);
    for (auto& r : recs) {
      if (r.empty())
        ++dropped;
      else
        rows.push_back(std::move(r));
    }
    if (rows.size() < 10) throw std::runtime_error("rwre exponent: too few rows");
    Stream boot = seeds.child(0x626f6f74).stream();
    const auto slope = loglog_slope_of_medians(levels_d, rows, 1000, boot);
    csv.row({"level", "median_delta"});
    std::vector<double> col(rows.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
      for (std::size_t r = 0; r < rows.size(); ++r) col[r] = rows[r][i];
      csv.row({fmt(levels_d[i]), fmt(median(col))});
    }
    out.files.emplace_back("results.csv", csv.text);
    Csv summary;
    summary.row({"key", "value"});
    summary.row({"slope", fmt(slope.estimate)});
    summary.row({"ci_lo", fmt(slope.ci_lo)});
    summary.row({"ci_hi", fmt(slope.ci_hi)});
    const auto alpha = kks_alpha(law);
    if (alpha) summary.row({"kks_alpha", fmt(*alpha)});
    summary.row({"dropped", std::to_string(dropped)});
    out.files.emplace_back("summary.csv", summary.text);
    out.partial = dropped > 0;
  } else {
    throw std::invalid_argument("rwre1d: unknown experiment " + experiment);
  }
  return out;
}

RunOutput run_gwtree(const json& params, const json& budget, SeedTree seeds,
                     unsigned workers) {
  const std::string experiment = params.at("experiment").get<std::string>();
  const std::size_t replicas = budget.at("replicas").get<std::size_t>();
  const OffspringLaw law = pmf_from_json(params.at("pmf"));
  RunOutput out;
  Csv csv;

  if (experiment == "speed_curve") {
    const auto steps = budget.at("steps").get<std::int64_t>();
    const auto betas = grid_from_json(params.at("beta_grid"));
    csv.row({"beta", "v_hat", "ci_lo", "ci_hi", "n_steps"});
    for (std::size_t i = 0; i < betas.size(); ++i) {
      const auto rep = tree_walk_speed(law, BiasSpec::fixed(betas[i]), steps,
                                       replicas, seeds.child(i), workers);
      csv.row({fmt(betas[i]), fmt(rep.estimate), fmt(rep.ci_lo),
               fmt(rep.ci_hi), std::to_string(steps)});
    }
    out.files.emplace_back("results.csv", csv.text);
  } else if (experiment == "exponent") {
    const auto levels_d = grid_from_json(params.at("levels"));
    std::vector<std::int64_t> levels(levels_d.begin(), levels_d.end());
    const auto cap = budget.value("steps", std::int64_t{100'000'000});
    const double beta = params.at("beta").get<double>();
    const auto est = tree_delta_exponent(law, BiasSpec::fixed(beta), levels,
                                         replicas, cap, seeds, workers);
    csv.row({"level", "median_delta"});
    for (std::size_t i = 0; i < est.levels.size(); ++i)
      csv.row({fmt(est.levels[i]), fmt(est.median_delta[i])});
    out.files.emplace_back("results.csv", csv.text);
    Csv summary;
    summary.row({"key", "value"});
    summary.row({"slope", fmt(est.slope.estimate)});
    summary.row({"ci_lo", fmt(est.slope.ci_lo)});
    summary.row({"ci_hi", fmt(est.slope.ci_hi)});
    summary.row({"target", fmt(1.0 / alpha_tree(law, beta))});
    summary.row({"dropped", std::to_string(est.dropped_replicas)});
    out.files.emplace_back("summary.csv", summary.text);
    out.partial = est.dropped_replicas > 0;
  } else if (experiment == "lattice") {
    const double beta = params.at("beta").get<double>();
    const int k_max = params.at("k_max").get<int>();
    const auto lambdas = grid_from_json(params.at("lambda_grid"));
    const auto cap = budget.value("steps", std::int64_t{100'000'000});
    const auto diag = lattice_diagnostic(law, beta, k_max, lambdas, replicas,
                                         cap, seeds, workers);
    csv.row({"lambda", "k", "level", "cross_k_ks"});
    for (const auto& track : diag.tracks)
      for (std::size_t k = 0; k + 1 < track.levels.size(); ++k)
        csv.row({fmt(track.lambda), std::to_string(k),
                 std::to_string(track.levels[k]), fmt(track.cross_k_ks[k])});
    out.files.emplace_back("results.csv", csv.text);
    out.partial = diag.censored > 0;
  } else if (experiment == "einstein") {
    // exploratory: discrete-time probe of v(exp(a)/m)/a against sigma^2
    const auto steps = budget.at("steps").get<std::int64_t>();
    const auto alphas = grid_from_json(params.at("alpha_grid"));
    const double sigma2 = leafless_sigma2(law);
    csv.row({"alpha", "beta", "v_hat", "v_over_alpha", "sigma2"});
    for (std::size_t i = 0; i < alphas.size(); ++i) {
      const double beta = std::exp(alphas[i]) / law.mean();
      const auto rep = tree_walk_speed(law, BiasSpec::fixed(beta), steps,
                                       replicas, seeds.child(i), workers);
      csv.row({fmt(alphas[i]), fmt(beta), fmt(rep.estimate),
               fmt(rep.estimate / alphas[i]), fmt(sigma2)});
    }
    out.files.emplace_back("results.csv", csv.text);
  } else {
    throw std::invalid_argument("gwtree: unknown experiment " + experiment);
  }
  return out;
}

RunOutput run_perc(const json& params, const json& budget, SeedTree seeds,
                   unsigned workers) {
  const std::string experiment = params.at("experiment").get<std::string>();
  const double p = params.at("p").get<double>();
  std::vector<double> dir;
  for (const auto& c : params.at("direction")) dir.push_back(c.get<double>());
  RunOutput out;
  Csv csv;

  if (experiment == "zeta") {
    const int n_max = params.at("n_max").get<int>();
    const auto boxes = budget.at("replicas").get<std::size_t>();
    const auto est = zeta_estimate(2, p, dir, n_max, boxes, seeds, workers);
    csv.row({"n", "tail_count", "p_hat"});
    for (std::size_t n = 0; n < est.tail_counts.size(); ++n)
      csv.row({std::to_string(n), std::to_string(est.tail_counts[n]),
               fmt(static_cast<double>(est.tail_counts[n]) /
                   static_cast<double>(est.boxes_used))});
    out.files.emplace_back("results.csv", csv.text);
    Csv summary;
    summary.row({"key", "value"});
    summary.row({"zeta", fmt(est.zeta)});
    summary.row({"lambda_c", fmt(est.zeta / 2.0)});
    summary.row({"r2", fmt(est.r2)});
    summary.row({"boxes_used", std::to_string(est.boxes_used)});
    summary.row({"flagged", est.flagged ? "1" : "0"});
    out.files.emplace_back("summary.csv", summary.text);
  } else if (experiment == "speed_curve") {
    const auto steps = budget.at("steps").get<std::int64_t>();
    const auto replicas = budget.at("replicas").get<std::size_t>();
    const auto lambdas = grid_from_json(params.at("lambda_grid"));
    std::vector<int> sides;
    for (const auto& s : params.at("sides")) sides.push_back(s.get<int>());
    std::vector<int> start;
    for (const auto& s : params.at("start")) start.push_back(s.get<int>());
    const int levels = params.value("delta_levels", 0);
    const auto curve = speed_curve(2, p, dir, lambdas, steps, replicas, sides,
                                   start, levels, seeds, workers);
    csv.row({"lambda", "v_hat", "ci_lo", "ci_hi", "truncated", "delta_slope"});
    for (const auto& pt : curve) {
      csv.row({fmt(pt.lambda), fmt(pt.speed.estimate), fmt(pt.speed.ci_lo),
               fmt(pt.speed.ci_hi), std::to_string(pt.truncated),
               pt.has_delta_slope ? fmt(pt.delta_slope.estimate) : ""});
      if (pt.truncated > 0) out.partial = true;
    }
    out.files.emplace_back("results.csv", csv.text);
  } else {
    throw std::invalid_argument("perc: unknown experiment " + experiment);
  }
  return out;
}

RunOutput run_iic(const json& params, const json& budget, SeedTree seeds,
                  unsigned workers) {
  const std::string experiment = params.at("experiment").get<std::string>();
  const std::size_t replicas = budget.at("replicas").get<std::size_t>();
  const CriticalLaw law(pmf_from_json(params.at("pmf")));
  RunOutput out;
  Csv csv;

  if (experiment == "height_tail") {
    const auto grid_d = grid_from_json(params.at("n_grid"));
    std::vector<int> grid(grid_d.begin(), grid_d.end());
    const auto tail = critical_height_tail(law, grid, replicas, seeds, workers);
    csv.row({"n", "survival", "n_survival", "asymptote"});
    for (std::size_t i = 0; i < grid.size(); ++i)
      csv.row({std::to_string(grid[i]), fmt(tail.survival[i]),
               fmt(tail.n_times_survival[i]), fmt(tail.asymptote_constant)});
    out.files.emplace_back("results.csv", csv.text);
  } else if (experiment == "aging") {
    const double beta = params.at("beta").get<double>();
    const double a = params.at("a").get<double>();
    const double b = params.at("b").get<double>();
    const int n = params.at("n").get<int>();
    const auto res = biased_walk_iic(law, beta, a, b, n, {0.5, 1.0, 1.5, 2.0},
                                     replicas, seeds, workers);
    csv.row({"key", "value"});
    csv.row({"p_hat", fmt(res.aging_p_hat)});
    csv.row({"std_error", fmt(res.aging_std_error)});
    csv.row({"a_over_b", fmt(res.a_over_b)});
    csv.row({"replicas", std::to_string(res.replicas)});
    out.files.emplace_back("results.csv", csv.text);
    out.partial = res.replicas < replicas;
  } else if (experiment == "displacement") {
    const auto grid_d = grid_from_json(params.at("n_grid"));
    std::vector<std::int64_t> grid(grid_d.begin(), grid_d.end());
    const double beta = params.value("beta", 1.0);
    const auto disp =
        beta == 1.0 ? simple_walk_iic(law, grid, replicas, seeds, workers)
                    : biased_walk_iic_displacement(law, beta, grid, replicas,
                                                   seeds, workers);
    csv.row({"n", "median_displacement"});
    for (std::size_t i = 0; i < disp.n_grid.size(); ++i)
      csv.row({fmt(disp.n_grid[i]), fmt(disp.median_disp[i])});
    out.files.emplace_back("results.csv", csv.text);
    Csv summary;
    summary.row({"key", "value"});
    summary.row({"slope", fmt(disp.slope.estimate)});
    summary.row({"ci_lo", fmt(disp.slope.ci_lo)});
    summary.row({"ci_hi", fmt(disp.slope.ci_hi)});
    out.files.emplace_back("summary.csv", summary.text);
  } else {
    throw std::invalid_argument("iic: unknown experiment " + experiment);
  }
  return out;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

int run_experiment(const std::string& config_path,
                   const std::string& output_override) {
  json config;
  std::string model;
  fs::path out_dir;
  try {
    config = load_json(config_path);
    model = config.at("model").get<std::string>();
    out_dir = output_override.empty()
                  ? fs::path(config.value("output", "run"))
                  : fs::path(output_override);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  }

  RunOutput out;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto& params = config.at("params");
    const auto& budget = config.at("budget");
    const auto seed = config.at("seed").get<std::uint64_t>();
    const unsigned workers = budget.value("workers", 0u);
    SeedTree seeds(seed);
    if (model == "btm")
      out = run_btm(params, budget, seeds, workers);
    else if (model == "rwre1d")
      out = run_rwre(params, budget, seeds, workers);
    else if (model == "gwtree")
      out = run_gwtree(params, budget, seeds, workers);
    else if (model == "perc")
      out = run_perc(params, budget, seeds, workers);
    else if (model == "iic")
      out = run_iic(params, budget, seeds, workers);
    else {
      std::fprintf(stderr, "config error: unknown model %s\n", model.c_str());
      return 2;
    }
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "run failed: %s\n", e.what());
    return 2;
  }
  const auto wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();

  std::error_code ec;
  fs::create_directories(out_dir, ec);

  json manifest;
  manifest["config"] = config;
  manifest["config_hash"] = hex64(fnv1a(config.dump()));
  manifest["code_version"] = kCodeVersion;
  manifest["wall_clock_ms"] = wall_ms;
  manifest["replica_seed_paths"] =
      "SeedTree(config.seed).child(replica_index) per replica";
  json digests = json::object();
  for (const auto& [name, bytes] : out.files) {
    write_file(out_dir / name, bytes);
    digests[name] = hex64(fnv1a(bytes));
  }
  manifest["result_digests"] = digests;
  manifest["partial"] = out.partial;
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

  return out.partial ? 3 : 0;
}

int make_figure(const std::string& run_dir) {
  try {
    const fs::path dir(run_dir);
    const json manifest = load_json((dir / "manifest.json").string());
    const std::string model = manifest.at("config").at("model").get<std::string>();
    const std::string experiment =
        manifest.at("config").at("params").at("experiment").get<std::string>();

    std::ifstream in(dir / "results.csv");
    if (!in) throw std::invalid_argument("missing results.csv");
    std::string header_line;
    std::getline(in, header_line);
    std::vector<std::string> header;
    {
      std::stringstream ss(header_line);
      std::string cell;
      while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    auto col = [&](const std::string& name) -> int {
      for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
      return -1;
    };

    Csv fig;
    fig.row({"x", "y", "series", "ci_lo", "ci_hi"});
    std::string line;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (cells.empty()) continue;
      auto get = [&](int i) {
        return i >= 0 && i < static_cast<int>(cells.size()) ? cells[static_cast<std::size_t>(i)]
                                                            : std::string();
      };
      if (experiment == "speed_curve") {
        const int x = model == "perc" ? col("lambda") : col("beta");
        fig.row({get(x), get(col("v_hat")), "speed", get(col("ci_lo")),
                 get(col("ci_hi"))});
      } else if (experiment == "aging") {
        if (col("ratio") >= 0) {
          fig.row({get(col("ratio")), get(col("empirical")), "empirical", "", ""});
          fig.row({get(col("ratio")), get(col("arcsine")), "arcsine", "", ""});
        } else {
          fig.row({get(col("key")), get(col("value")), "aging", "", ""});
        }
      } else if (experiment == "lattice") {
        fig.row({get(col("k")), get(col("cross_k_ks")),
                 "lambda=" + get(col("lambda")), "", ""});
      } else if (experiment == "zeta") {
        fig.row({get(col("n")), get(col("p_hat")), "tail", "", ""});
      } else if (experiment == "height_tail") {
        fig.row({get(col("n")), get(col("n_survival")), "n_survival", "", ""});
        fig.row({get(col("n")), get(col("asymptote")), "asymptote", "", ""});
      } else {
        // generic two-column results
        if (cells.size() >= 2) fig.row({cells[0], cells[1], experiment, "", ""});
      }
    }
    write_file(dir / "figure.csv", fig.text);
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "figure error: %s\n", e.what());
    return 2;
  }
}

int print_analytics(const std::vector<std::string>& atoms, double beta) {
  try {
    std::vector<std::pair<int, double>> pairs;
    for (const auto& a : atoms) {
      const auto pos = a.find(':');
      if (pos == std::string::npos)
        throw std::invalid_argument("atom must look like k:p");
      pairs.emplace_back(std::stoi(a.substr(0, pos)),
                         std::stod(a.substr(pos + 1)));
    }
    const OffspringLaw law = OffspringLaw::from_atoms(pairs);
    std::printf("m = %s\n", fmt(law.mean()).c_str());
    if (!law.supercritical()) {
      std::printf("law is not supercritical (q = 1)\n");
      return 0;
    }
    const double q = extinction_prob(law);
    std::printf("q = %s\n", fmt(q).c_str());
    const auto bc = critical_bias(law);
    if (bc) {
      std::printf("beta_c = %s\n", fmt(*bc).c_str());
    } else {
      std::printf("beta_c = none (leafless: positive speed for all beta)\n");
      std::printf("sigma2 = %s\n", fmt(leafless_sigma2(law)).c_str());
    }
    const auto split = harris_split(law);
    std::printf("g:");
    for (std::size_t k = 0; k <= split.g.max_k(); ++k)
      if (split.g.p(k) > 0) std::printf(" %zu:%s", k, fmt(split.g.p(k)).c_str());
    std::printf("\n");
    if (split.h) {
      std::printf("h:");
      for (std::size_t k = 0; k <= split.h->max_k(); ++k)
        if (split.h->p(k) > 0)
          std::printf(" %zu:%s", k, fmt(split.h->p(k)).c_str());
      std::printf("\n");
    }
    if (beta > 1.0 && bc)
      std::printf("alpha(beta=%s) = %s\n", fmt(beta).c_str(),
                  fmt(alpha_tree(law, beta)).c_str());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "analytics error: %s\n", e.what());
    return 2;
  }
}

int selftest() {
  int failures = 0;
  auto check = [&](const char* name, bool ok) {
    std::printf("%s: %s\n", ok ? "ok" : "FAIL", name);
    if (!ok) ++failures;
  };
  auto close = [](double a, double b, double tol) {
    return std::abs(a - b) <= tol;
  };

  const OffspringLaw fig2({0.1, 0.0, 0.9});
  const OffspringLaw fig3({0.25, 1.0 / 3.0, 5.0 / 12.0});
  check("q(fig2) = 1/9", close(extinction_prob(fig2), 1.0 / 9.0, 1e-10));
  check("beta_c(fig2) = 5", close(*critical_bias(fig2), 5.0, 1e-10));
  check("q(fig3) = 3/5", close(extinction_prob(fig3), 0.6, 1e-10));
  check("beta_c(fig3) = 6/5", close(*critical_bias(fig3), 1.2, 1e-10));
  const auto split = harris_split(fig2);
  check("harris g(fig2) = {1:1/5, 2:4/5}",
        close(split.g.p(1), 0.2, 1e-10) && close(split.g.p(2), 0.8, 1e-10));
  check("harris h(fig2) = {0:9/10, 2:1/10}",
        close(split.h->p(0), 0.9, 1e-10) && close(split.h->p(2), 0.1, 1e-10));
  check("sigma2(Z==2) = 2",
        close(leafless_sigma2(OffspringLaw({0.0, 0.0, 1.0})), 2.0, 1e-12));
  check("sigma2(p1=p3=1/2) = 4/3",
        close(leafless_sigma2(OffspringLaw({0.0, 0.5, 0.0, 0.5})), 4.0 / 3.0,
              1e-12));

  const SiteLaw zero_speed({{1.0 / 3.0, 0.5}, {0.8, 0.5}});
  const auto alpha = kks_alpha(zero_speed);
  check("kks alpha = ln(phi)/ln(2)",
        alpha && close(*alpha, std::log((1.0 + std::sqrt(5.0)) / 2.0) /
                                   std::log(2.0),
                       1e-9));
  const auto [a_n, b_n] = normalizing_sequences(TailSpec(1.5, 1.0), 8);
  check("normalizing (alpha=1.5, n=8) = (4, 12)",
        close(a_n, 4.0, 1e-12) && close(b_n, 12.0, 1e-10));
  check("arcsine_cdf(1/2, 1/2) = 1/2", close(arcsine_cdf(0.5, 0.5), 0.5, 1e-10));
  check("arcsine boundaries",
        arcsine_cdf(0.7, 0.0) == 0.0 && arcsine_cdf(0.7, 1.0) == 1.0);
  check("pareto inverse-CDF at u=1 is the scale",
        TailSpec(0.5, 1.0).from_uniform(1.0) == 1.0);
  check("pareto inverse-CDF closed form",
        close(TailSpec(0.5, 1.0).from_uniform(0.25), 16.0, 1e-12));
  const auto solomon = classify_regime(SiteLaw({{0.9, 0.5}, {0.6, 0.5}}));
  check("solomon speed 11/25",
        solomon.regime == Regime::ballistic && close(solomon.speed, 0.44, 1e-12));

  std::printf("%d failure(s)\n", failures);
  return failures == 0 ? 0 : 1;
}

}  // namespace rwlab
