#include "selmeta/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

#include "selmeta/errors.hpp"

namespace selmeta {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------- presets

std::vector<std::string> preset_names() { return {"crisscross", "pinch"}; }

ShootingProblem preset_scenario(const std::string& name) {
  ShootingProblem prob;
  if (name == "crisscross") {
    // the two landmarks swap vertical order while translating to the right
    prob.q0 = {{-1.0, 0.5}, {-1.0, -0.5}};
    prob.q1 = {{1.0, -0.5}, {1.0, 0.5}};
  } else if (name == "pinch") {
    // near-collapse of a vertical pair
    prob.q0 = {{0.0, 0.5}, {0.0, -0.5}};
    prob.q1 = {{0.0, 0.05}, {0.0, -0.05}};
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw UsageError("unknown scenario preset '" + name + "' (available: " + known + ")");
  }
  prob.kp.sigma_k_sq = 0.49;
  prob.field = NuField{{}, 0.04, 0.0};
  prob.ip = IntegratorParams{100, 0.0, 1.0};
  return prob;
}

// ----------------------------------------------------------------- config

ShootingProblem RunConfig::problem() const {
  ShootingProblem prob;
  prob.q0 = q0;
  prob.q1 = q1;
  prob.field = nu;
  prob.kp = kernel;
  prob.ip = integrator;
  prob.tol = tol;
  prob.max_iters = max_iters;
  return prob;
}

SamplerConfig RunConfig::sampler() const {
  SamplerConfig sc;
  sc.n_samples = n_samples;
  sc.n_centroids = static_cast<int>(nu.centroids.size());
  sc.beta = beta;
  sc.prior_scale = prior_scale;
  sc.sigma_nu_sq = nu.sigma_nu_sq;
  sc.seed = seed;
  sc.initial_centroids = nu.centroids;
  return sc;
}

namespace {

bool finite_point(const Point2& p) { return is_finite(p); }

}  // namespace

std::vector<std::string> validate(const RunConfig& cfg) {
  std::vector<std::string> v;
  if (cfg.q0.empty()) v.emplace_back("scenario must define at least one landmark");
  if (cfg.q0.size() != cfg.q1.size()) v.emplace_back("q0 and q1 must have the same number of landmarks");
  if (!std::all_of(cfg.q0.begin(), cfg.q0.end(), finite_point) || !std::all_of(cfg.q1.begin(), cfg.q1.end(), finite_point))
    v.emplace_back("landmark coordinates must be finite");
  if (!(cfg.kernel.sigma_k_sq > 0.0) || !std::isfinite(cfg.kernel.sigma_k_sq)) v.emplace_back("kernel.sigma_k_sq must be > 0");
  if (!(cfg.nu.sigma_nu_sq > 0.0) || !std::isfinite(cfg.nu.sigma_nu_sq)) v.emplace_back("nu.sigma_nu_sq must be > 0");
  if (!(cfg.nu.floor >= 0.0) || !std::isfinite(cfg.nu.floor)) v.emplace_back("nu.floor must be >= 0");
  if (cfg.nu.centroids.empty()) v.emplace_back("nu.n_centroids must be >= 1");
  if (!std::all_of(cfg.nu.centroids.begin(), cfg.nu.centroids.end(), finite_point)) v.emplace_back("nu.centroids must be finite");
  if (cfg.integrator.n_steps < 1) v.emplace_back("integrator.n_steps must be >= 1");
  if (!(cfg.integrator.t1 > cfg.integrator.t0)) v.emplace_back("integrator.t1 must be > integrator.t0");
  if (!(cfg.tol > 0.0)) v.emplace_back("solver.tol must be > 0");
  if (cfg.max_iters < 1) v.emplace_back("solver.max_iters must be >= 1");
  if (cfg.multistart.n_random < 0) v.emplace_back("solver.multistart.n_random must be >= 0");
  if (!(cfg.multistart.spread > 0.0)) v.emplace_back("solver.multistart.spread must be > 0");
  if (!(cfg.beta > 0.0 && cfg.beta <= 1.0)) v.emplace_back("beta must be in (0,1]");
  if (cfg.n_samples < 1) v.emplace_back("sampler.n_samples must be >= 1");
  if (!(cfg.prior_scale > 0.0)) v.emplace_back("sampler.prior_scale must be > 0");
  if (!(cfg.grid.x_max > cfg.grid.x_min)) v.emplace_back("grid.x_max must be > grid.x_min");
  if (!(cfg.grid.y_max > cfg.grid.y_min)) v.emplace_back("grid.y_max must be > grid.y_min");
  if (cfg.grid.nx < 1 || cfg.grid.ny < 1) v.emplace_back("grid.nx and grid.ny must be >= 1");
  if (cfg.max_lag < 0) v.emplace_back("diagnostics.max_lag must be >= 0");
  if (cfg.hist_bins < 1) v.emplace_back("diagnostics.hist_bins must be >= 1");
  if (cfg.output_dir.empty()) v.emplace_back("output_dir must not be empty");
  return v;
}

namespace {

// Collects schema problems while walking the document so they can be reported together.
class Reader {
public:
  explicit Reader(std::vector<std::string>& errors) : errors_(errors) {}

  void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items())
      if (!allowed.contains(key)) errors_.push_back("unknown key '" + where + key + "'");
  }

  template <typename T>
  void get(const json& obj, const std::string& key, const std::string& where, T& out) {
    if (!obj.contains(key)) return;
    try {
      out = obj.at(key).get<T>();
    } catch (const json::exception&) {
      errors_.push_back("'" + where + key + "' has the wrong type");
    }
  }

  std::optional<std::vector<Point2>> points(const json& node, const std::string& name) {
    if (!node.is_array()) {
      errors_.push_back("'" + name + "' must be a list of [x, y] pairs");
      return std::nullopt;
    }
    std::vector<Point2> pts;
    for (const auto& item : node) {
      if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
        errors_.push_back("'" + name + "' must be a list of [x, y] pairs");
        return std::nullopt;
      }
      pts.emplace_back(item[0].get<double>(), item[1].get<double>());
    }
    return pts;
  }

  bool object(const json& doc, const std::string& key) {
    if (!doc.contains(key)) return false;
    if (!doc.at(key).is_object()) {
      errors_.push_back("'" + key + "' must be an object");
      return false;
    }
    return true;
  }

private:
  std::vector<std::string>& errors_;
};

std::string join_lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += "\n  - " + s;
  return out;
}

json points_json(const std::vector<Point2>& pts) {
  json arr = json::array();
  for (const auto& p : pts) arr.push_back({p.x(), p.y()});
  return arr;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config parse error: ") + e.what());
  }
  if (!doc.is_object()) throw UsageError("config must be a JSON object");

  std::vector<std::string> errors;
  Reader rd(errors);
  rd.check_keys(doc, "", {"scenario", "kernel", "nu", "integrator", "solver", "sampler", "grid", "diagnostics", "output_dir"});

  RunConfig cfg;
  // Preset first; explicit values below override it.
  const json scenario = doc.value("scenario", json("crisscross"));
  if (scenario.is_string()) {
    cfg.scenario = scenario.get<std::string>();
    try {
      const ShootingProblem preset = preset_scenario(cfg.scenario);
      cfg.q0 = preset.q0;
      cfg.q1 = preset.q1;
      cfg.kernel = preset.kp;
      cfg.nu.sigma_nu_sq = preset.field.sigma_nu_sq;
      cfg.integrator = preset.ip;
    } catch (const UsageError& e) {
      errors.emplace_back(e.what());
    }
  } else if (scenario.is_object()) {
    cfg.scenario.clear();
    rd.check_keys(scenario, "scenario.", {"q0", "q1"});
    if (!scenario.contains("q0") || !scenario.contains("q1")) errors.emplace_back("inline scenario needs both 'q0' and 'q1'");
    if (scenario.contains("q0"))
      if (auto p = rd.points(scenario["q0"], "scenario.q0")) cfg.q0 = *p;
    if (scenario.contains("q1"))
      if (auto p = rd.points(scenario["q1"], "scenario.q1")) cfg.q1 = *p;
  } else {
    errors.emplace_back("'scenario' must be a preset name or an object with q0/q1");
  }

  if (rd.object(doc, "kernel")) {
    const auto& k = doc["kernel"];
    rd.check_keys(k, "kernel.", {"sigma_k_sq"});
    rd.get(k, "sigma_k_sq", "kernel.", cfg.kernel.sigma_k_sq);
  }
  if (rd.object(doc, "nu")) {
    const auto& n = doc["nu"];
    rd.check_keys(n, "nu.", {"n_centroids", "sigma_nu_sq", "floor", "centroids"});
    rd.get(n, "sigma_nu_sq", "nu.", cfg.nu.sigma_nu_sq);
    rd.get(n, "floor", "nu.", cfg.nu.floor);
    std::optional<int> count;
    if (n.contains("n_centroids")) {
      int k = 0;
      rd.get(n, "n_centroids", "nu.", k);
      count = k;
    }
    if (n.contains("centroids")) {
      if (auto p = rd.points(n["centroids"], "nu.centroids")) {
        cfg.nu.centroids = *p;
        if (count && *count != static_cast<int>(p->size())) errors.emplace_back("nu.n_centroids does not match the number of nu.centroids");
      }
    } else if (count) {
      cfg.nu.centroids.assign(static_cast<std::size_t>(std::max(*count, 0)), Point2::Zero());
    }
  }
  if (rd.object(doc, "integrator")) {
    const auto& i = doc["integrator"];
    rd.check_keys(i, "integrator.", {"n_steps", "t0", "t1"});
    rd.get(i, "n_steps", "integrator.", cfg.integrator.n_steps);
    rd.get(i, "t0", "integrator.", cfg.integrator.t0);
    rd.get(i, "t1", "integrator.", cfg.integrator.t1);
  }
  if (rd.object(doc, "solver")) {
    const auto& s = doc["solver"];
    rd.check_keys(s, "solver.", {"tol", "max_iters", "multistart"});
    rd.get(s, "tol", "solver.", cfg.tol);
    rd.get(s, "max_iters", "solver.", cfg.max_iters);
    if (s.contains("multistart")) {
      if (!s["multistart"].is_object()) {
        errors.emplace_back("'solver.multistart' must be an object");
      } else {
        const auto& m = s["multistart"];
        rd.check_keys(m, "solver.multistart.", {"n_random", "spread", "seed"});
        rd.get(m, "n_random", "solver.multistart.", cfg.multistart.n_random);
        rd.get(m, "spread", "solver.multistart.", cfg.multistart.spread);
        rd.get(m, "seed", "solver.multistart.", cfg.multistart.seed);
      }
    }
  }
  if (rd.object(doc, "sampler")) {
    const auto& s = doc["sampler"];
    rd.check_keys(s, "sampler.", {"beta", "n_samples", "prior_scale", "seed"});
    rd.get(s, "beta", "sampler.", cfg.beta);
    rd.get(s, "n_samples", "sampler.", cfg.n_samples);
    rd.get(s, "prior_scale", "sampler.", cfg.prior_scale);
    rd.get(s, "seed", "sampler.", cfg.seed);
  }
  if (rd.object(doc, "grid")) {
    const auto& g = doc["grid"];
    rd.check_keys(g, "grid.", {"x_min", "x_max", "y_min", "y_max", "nx", "ny"});
    rd.get(g, "x_min", "grid.", cfg.grid.x_min);
    rd.get(g, "x_max", "grid.", cfg.grid.x_max);
    rd.get(g, "y_min", "grid.", cfg.grid.y_min);
    rd.get(g, "y_max", "grid.", cfg.grid.y_max);
    rd.get(g, "nx", "grid.", cfg.grid.nx);
    rd.get(g, "ny", "grid.", cfg.grid.ny);
  }
  if (rd.object(doc, "diagnostics")) {
    const auto& d = doc["diagnostics"];
    rd.check_keys(d, "diagnostics.", {"max_lag", "hist_bins"});
    rd.get(d, "max_lag", "diagnostics.", cfg.max_lag);
    rd.get(d, "hist_bins", "diagnostics.", cfg.hist_bins);
  }
  rd.get(doc, "output_dir", "", cfg.output_dir);

  const auto violations = validate(cfg);
  errors.insert(errors.end(), violations.begin(), violations.end());
  if (!errors.empty()) throw UsageError("invalid config:" + join_lines(errors));
  return cfg;
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const UsageError& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

std::string dump_config(const RunConfig& cfg) {
  json doc;
  if (cfg.scenario.empty()) {
    doc["scenario"] = {{"q0", points_json(cfg.q0)}, {"q1", points_json(cfg.q1)}};
  } else {
    doc["scenario"] = cfg.scenario;
  }
  doc["kernel"] = {{"sigma_k_sq", cfg.kernel.sigma_k_sq}};
  doc["nu"] = {{"n_centroids", cfg.nu.centroids.size()},
               {"sigma_nu_sq", cfg.nu.sigma_nu_sq},
               {"floor", cfg.nu.floor},
               {"centroids", points_json(cfg.nu.centroids)}};
  doc["integrator"] = {{"n_steps", cfg.integrator.n_steps}, {"t0", cfg.integrator.t0}, {"t1", cfg.integrator.t1}};
  doc["solver"] = {{"tol", cfg.tol},
                   {"max_iters", cfg.max_iters},
                   {"multistart",
                    {{"n_random", cfg.multistart.n_random}, {"spread", cfg.multistart.spread}, {"seed", cfg.multistart.seed}}}};
  doc["sampler"] = {{"beta", cfg.beta}, {"n_samples", cfg.n_samples}, {"prior_scale", cfg.prior_scale}, {"seed", cfg.seed}};
  doc["grid"] = {{"x_min", cfg.grid.x_min}, {"x_max", cfg.grid.x_max}, {"y_min", cfg.grid.y_min},
                 {"y_max", cfg.grid.y_max}, {"nx", cfg.grid.nx},       {"ny", cfg.grid.ny}};
  doc["diagnostics"] = {{"max_lag", cfg.max_lag}, {"hist_bins", cfg.hist_bins}};
  doc["output_dir"] = cfg.output_dir;
  return doc.dump(2) + "\n";
}

void save_config(const RunConfig& cfg, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write config " + path.string());
  out << dump_config(cfg);
  if (!out) throw IoError("error writing config " + path.string());
}

// ------------------------------------------------------------ text tables

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

class CsvWriter {
public:
  explicit CsvWriter(const fs::path& path) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("error writing " + path_.string());
  }

private:
  fs::path path_;
  std::ofstream out_;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

CsvTable read_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw IoError(path.string() + ": missing header row");
  if (line.back() == '\r') line.pop_back();
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                    " columns, found " + std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  return t;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& expected, const fs::path& path) {
  if (t.header != expected) {
    std::string want;
    for (const auto& h : expected) want += (want.empty() ? "" : ",") + h;
    throw IoError(path.string() + ": unexpected header (want " + want + ")");
  }
}

double to_double(const std::string& s, const fs::path& path, std::size_t row) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": row " + std::to_string(row + 1) + ": bad number '" + s + "'");
  }
}

long to_long(const std::string& s, const fs::path& path, std::size_t row) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError(path.string() + ": row " + std::to_string(row + 1) + ": bad integer '" + s + "'");
  }
}

bool to_flag(const std::string& s, const fs::path& path, std::size_t row) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw IoError(path.string() + ": row " + std::to_string(row + 1) + ": flag must be 0 or 1, got '" + s + "'");
}

const std::vector<std::string> kTrajectoryHeader{"t", "landmark", "qx", "qy", "px", "py", "hamiltonian"};
const std::vector<std::string> kScanHeader{"ix", "iy", "cx", "cy", "action", "converged"};

}  // namespace

void write_trajectory(const Trajectory& traj, const fs::path& path) {
  CsvWriter w(path);
  w.row(kTrajectoryHeader);
  for (std::size_t s = 0; s < traj.states.size(); ++s) {
    const auto& st = traj.states[s];
    for (std::size_t i = 0; i < st.size(); ++i) {
      w.row({fmt(traj.times[s]), std::to_string(i), fmt(st.q[i].x()), fmt(st.q[i].y()), fmt(st.p[i].x()),
             fmt(st.p[i].y()), fmt(traj.hamiltonian_series[s])});
    }
  }
  w.close();
}

Trajectory read_trajectory(const fs::path& path) {
  const CsvTable t = read_table(path);
  expect_header(t, kTrajectoryHeader, path);
  if (t.rows.empty()) throw IoError(path.string() + ": trajectory has no rows");

  Trajectory traj;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const double time = to_double(row[0], path, r);
    const long landmark = to_long(row[1], path, r);
    if (landmark == 0) {
      traj.states.emplace_back();
      traj.times.push_back(time);
      traj.hamiltonian_series.push_back(to_double(row[6], path, r));
    } else if (traj.states.empty() || landmark != static_cast<long>(traj.states.back().size()) || time != traj.times.back()) {
      throw IoError(path.string() + ": row " + std::to_string(r + 1) + ": landmarks out of order");
    }
    traj.states.back().q.emplace_back(to_double(row[2], path, r), to_double(row[3], path, r));
    traj.states.back().p.emplace_back(to_double(row[4], path, r), to_double(row[5], path, r));
  }
  const std::size_t m = traj.states.front().size();
  for (const auto& s : traj.states)
    if (s.size() != m) throw IoError(path.string() + ": inconsistent landmark count between time steps");
  traj.action = trapezoid(traj.times, traj.hamiltonian_series);
  return traj;
}

void write_chain(const Chain& chain, const fs::path& path) {
  const std::size_t k = chain.samples.empty() ? static_cast<std::size_t>(chain.config.n_centroids)
                                              : chain.samples.front().centroids.size();
  std::vector<std::string> header{"iter"};
  for (std::size_t c = 1; c <= k; ++c) {
    header.push_back("h" + std::to_string(c) + "x");
    header.push_back("h" + std::to_string(c) + "y");
  }
  header.insert(header.end(), {"action", "accepted", "converged"});

  CsvWriter w(path);
  w.row(header);
  for (std::size_t j = 0; j < chain.samples.size(); ++j) {
    const auto& s = chain.samples[j];
    std::vector<std::string> row{std::to_string(j)};
    for (const auto& h : s.centroids) {
      row.push_back(fmt(h.x()));
      row.push_back(fmt(h.y()));
    }
    row.push_back(fmt(s.action));
    row.push_back(s.accepted ? "1" : "0");
    row.push_back(s.shooting_converged ? "1" : "0");
    w.row(row);
  }
  w.close();
}

Chain read_chain(const fs::path& path) {
  const CsvTable t = read_table(path);
  const std::size_t cols = t.header.size();
  if (cols < 6 || (cols - 4) % 2 != 0 || t.header[0] != "iter" || t.header[cols - 3] != "action" ||
      t.header[cols - 2] != "accepted" || t.header[cols - 1] != "converged")
    throw IoError(path.string() + ": not a chain file (want iter,h1x,h1y,...,action,accepted,converged)");
  const std::size_t k = (cols - 4) / 2;
  for (std::size_t c = 0; c < k; ++c) {
    if (t.header[1 + 2 * c] != "h" + std::to_string(c + 1) + "x" || t.header[2 + 2 * c] != "h" + std::to_string(c + 1) + "y")
      throw IoError(path.string() + ": bad centroid column names");
  }

  Chain chain;
  long accepted = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    if (to_long(row[0], path, r) != static_cast<long>(r)) throw IoError(path.string() + ": row " + std::to_string(r + 1) + ": iter out of sequence");
    ChainSample s;
    for (std::size_t c = 0; c < k; ++c)
      s.centroids.emplace_back(to_double(row[1 + 2 * c], path, r), to_double(row[2 + 2 * c], path, r));
    s.action = to_double(row[cols - 3], path, r);
    s.accepted = to_flag(row[cols - 2], path, r);
    s.shooting_converged = to_flag(row[cols - 1], path, r);
    if (r > 0 && s.accepted) ++accepted;
    chain.samples.push_back(std::move(s));
  }
  chain.config.n_centroids = static_cast<int>(k);
  chain.config.n_samples = static_cast<int>(chain.samples.size());
  chain.config.initial_centroids = chain.samples.empty() ? std::vector<Point2>(k, Point2::Zero()) : chain.samples.front().centroids;
  chain.acceptance_rate = chain.samples.size() > 1 ? static_cast<double>(accepted) / static_cast<double>(chain.samples.size() - 1) : 0.0;
  return chain;
}

void write_scan(const ScanResult& scan, const fs::path& path) {
  CsvWriter w(path);
  w.row(kScanHeader);
  for (int iy = 0; iy < scan.grid.ny; ++iy) {
    for (int ix = 0; ix < scan.grid.nx; ++ix) {
      const Point2 c = scan.grid.centre(ix, iy);
      w.row({std::to_string(ix), std::to_string(iy), fmt(c.x()), fmt(c.y()), fmt(scan.action(ix, iy)),
             scan.cell_converged(ix, iy) ? "1" : "0"});
    }
  }
  w.close();
}

ScanResult read_scan(const fs::path& path, const std::optional<GridSpec>& grid) {
  const CsvTable t = read_table(path);
  expect_header(t, kScanHeader, path);
  if (t.rows.empty()) throw IoError(path.string() + ": scan has no rows");

  struct Cell {
    int ix, iy;
    double cx, cy, action;
    bool converged;
  };
  std::vector<Cell> cells;
  int nx = 0;
  int ny = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    Cell c{static_cast<int>(to_long(row[0], path, r)), static_cast<int>(to_long(row[1], path, r)), to_double(row[2], path, r),
           to_double(row[3], path, r), to_double(row[4], path, r), to_flag(row[5], path, r)};
    if (c.ix < 0 || c.iy < 0) throw IoError(path.string() + ": row " + std::to_string(r + 1) + ": negative cell index");
    nx = std::max(nx, c.ix + 1);
    ny = std::max(ny, c.iy + 1);
    cells.push_back(c);
  }
  if (cells.size() != static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny))
    throw IoError(path.string() + ": scan does not cover a full " + std::to_string(nx) + "x" + std::to_string(ny) + " grid");

  ScanResult scan;
  if (grid) {
    if (grid->nx != nx || grid->ny != ny) throw IoError(path.string() + ": grid dimensions do not match the file");
    scan.grid = *grid;
  } else {
    if (nx < 2 || ny < 2) throw IoError(path.string() + ": single-cell axis; bounds cannot be recovered without a grid");
    std::map<int, double> xs, ys;
    for (const auto& c : cells) {
      xs[c.ix] = c.cx;
      ys[c.iy] = c.cy;
    }
    const double dx = (xs.at(nx - 1) - xs.at(0)) / (nx - 1);
    const double dy = (ys.at(ny - 1) - ys.at(0)) / (ny - 1);
    scan.grid = GridSpec{xs.at(0) - 0.5 * dx, xs.at(nx - 1) + 0.5 * dx, ys.at(0) - 0.5 * dy, ys.at(ny - 1) + 0.5 * dy, nx, ny};
  }
  scan.actions.assign(scan.grid.cell_count(), std::numeric_limits<double>::quiet_NaN());
  scan.converged.assign(scan.grid.cell_count(), false);
  std::vector<bool> seen(scan.grid.cell_count(), false);
  for (const auto& c : cells) {
    const std::size_t i = scan.grid.index(c.ix, c.iy);
    if (seen[i]) throw IoError(path.string() + ": duplicate cell (" + std::to_string(c.ix) + "," + std::to_string(c.iy) + ")");
    seen[i] = true;
    scan.actions[i] = c.action;
    scan.converged[i] = c.converged;
  }
  return scan;
}

void write_minima(const std::vector<LocalMinimum>& minima, const fs::path& path) {
  CsvWriter w(path);
  w.row({"ix", "iy", "cx", "cy", "action"});
  for (const auto& m : minima)
    w.row({std::to_string(m.ix), std::to_string(m.iy), fmt(m.position.x()), fmt(m.position.y()), fmt(m.action)});
  w.close();
}

void write_acf(const std::vector<std::string>& names, const std::vector<AcfResult>& series, const fs::path& path) {
  if (names.size() != series.size() || series.empty()) throw InvalidInput("write_acf: need one name per series");
  std::vector<std::string> header{"lag"};
  header.insert(header.end(), names.begin(), names.end());
  CsvWriter w(path);
  w.row(header);
  for (std::size_t k = 0; k < series.front().lags.size(); ++k) {
    std::vector<std::string> row{std::to_string(series.front().lags[k])};
    for (const auto& s : series) row.push_back(k < s.values.size() ? fmt(s.values[k]) : "nan");
    w.row(row);
  }
  w.close();
}

void write_heatmap(const Histogram2D& hist, const fs::path& path) {
  CsvWriter w(path);
  w.row({"ix", "iy", "cx", "cy", "count"});
  for (int iy = 0; iy < hist.grid.ny; ++iy) {
    for (int ix = 0; ix < hist.grid.nx; ++ix) {
      const Point2 c = hist.grid.centre(ix, iy);
      w.row({std::to_string(ix), std::to_string(iy), fmt(c.x()), fmt(c.y()), std::to_string(hist.count(ix, iy))});
    }
  }
  w.close();
}

void write_histogram(const Histogram1D& hist, const fs::path& path) {
  CsvWriter w(path);
  w.row({"bin", "lo", "hi", "count"});
  for (std::size_t b = 0; b < hist.counts.size(); ++b)
    w.row({std::to_string(b), fmt(hist.edges[b]), fmt(hist.edges[b + 1]), std::to_string(hist.counts[b])});
  w.close();
}

}  // namespace selmeta
