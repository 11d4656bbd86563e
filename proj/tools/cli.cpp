#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "erw/cgf.hpp"
#include "erw/equilibria.hpp"
#include "erw/error.hpp"
#include "erw/exact_dist.hpp"
#include "erw/large_dev.hpp"
#include "erw/process_sim.hpp"
#include "erw/urn_function.hpp"

namespace erw::cli {

namespace {

using Json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return fmt::format("{:.17g}", v); }

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_doubles(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) {
      throw UsageError(fmt::format("--{}: cannot parse '{}' as a number", key, item));
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(fmt::format("--{}: empty list", key));
  return out;
}

std::vector<std::int64_t> parse_ints(const std::string& key, const std::string& text) {
  std::vector<std::int64_t> out;
  for (double v : parse_doubles(key, text)) {
    if (v != std::floor(v)) throw UsageError(fmt::format("--{}: {} is not an integer", key, v));
    out.push_back(static_cast<std::int64_t>(v));
  }
  return out;
}

std::vector<double> uniform_grid(double lo, double hi, std::int64_t steps) {
  if (steps < 1) throw UsageError("grid needs at least one step");
  std::vector<double> g;
  for (std::int64_t i = 0; i <= steps; ++i) {
    g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(steps));
  }
  return g;
}

template <class T>
std::string echo_value(const T& v) {
  if constexpr (std::is_same_v<T, bool>) {
    return v ? "true" : "false";
  } else {
    return fmt::format("{}", v);
  }
}

// A subcommand whose options are echoed as key=value in the output header.
class Command {
 public:
  Command(CLI::App& parent, const std::string& name, const std::string& desc)
      : name_(name), app_(parent.add_subcommand(name, desc)) {
    app_->add_option("--config", config_, "Read key=value settings from a file; flags override it");
    app_->add_option("--out", out_path_, "Output file, '-' for stdout")->capture_default_str();
  }
  virtual ~Command() = default;

  const std::string& name() const { return name_; }
  CLI::App* app() const { return app_; }
  bool selected() const { return app_->parsed(); }

  template <class T>
  CLI::Option* option(const std::string& key, T& ref, const std::string& desc) {
    echo_.emplace_back(key, [&ref] { return echo_value(ref); });
    return app_->add_option("--" + key, ref, desc)->capture_default_str();
  }
  CLI::Option* flag(const std::string& key, bool& ref, const std::string& desc) {
    echo_.emplace_back(key, [&ref] { return echo_value(ref); });
    return app_->add_flag("--" + key, ref, desc);
  }

  std::string echo(const std::string& prefix_tokens = {}) const {
    std::string line = "erw " + name_;
    if (!prefix_tokens.empty()) line += " " + prefix_tokens;
    for (const auto& [key, get] : echo_) {
      const std::string v = get();
      if (v.empty()) continue;
      if (v.find_first_of(" \t\n") != std::string::npos) {
        throw UsageError(fmt::format("--{}: value '{}' must not contain whitespace", key, v));
      }
      line += fmt::format(" {}={}", key, v);
    }
    return line;
  }

  const std::string& out_path() const { return out_path_; }

  virtual void execute(std::ostream& out) = 0;

 private:
  std::string name_;
  CLI::App* app_;
  std::string config_;
  std::string out_path_ = "-";
  std::vector<std::pair<std::string, std::function<std::string()>>> echo_;
};

// Urn selection: --variant/--k/--p/--J/--coeffs, or --spec "variant=... k=...".
struct UrnArgs {
  std::string variant = "majority";
  std::string k = "1";
  std::string p = "0.75";
  std::string coupling = "1";
  std::string coeffs;
  std::string spec;
  CLI::App* app = nullptr;

  void add(CLI::App* a) {
    app = a;
    a->add_option("--variant", variant, "linear | majority | step | kgw | polynomial")->capture_default_str();
    a->add_option("--k", k, "Extracted steps (odd)")->capture_default_str();
    a->add_option("--p", p, "Memory parameter; fractions like 5/6 accepted")->capture_default_str();
    a->add_option("--J", coupling, "KGW coupling")->capture_default_str();
    a->add_option("--coeffs", coeffs, "Polynomial coefficients c0,c1,...");
    a->add_option("--spec", spec, "Whole urn as text, e.g. \"variant=majority k=3 p=0.9\"");
  }

  UrnFunction resolve() const {
    std::map<std::string, std::string> keys;
    if (!spec.empty()) keys = parse_key_values(spec);
    auto given = [&](const char* flag) { return app->count(flag) > 0; };
    if (given("--variant") || !keys.count("variant")) keys["variant"] = variant;
    const std::string& v = keys["variant"];
    const std::map<std::string, std::pair<const char*, const std::string*>> flags = {
        {"k", {"--k", &k}}, {"p", {"--p", &p}}, {"J", {"--J", &coupling}}, {"coeffs", {"--coeffs", &coeffs}}};
    std::vector<std::string> relevant;
    if (v == "majority") relevant = {"k", "p"};
    if (v == "linear" || v == "step") relevant = {"p"};
    if (v == "kgw") relevant = {"J"};
    if (v == "polynomial") relevant = {"coeffs"};
    for (const auto& [key, entry] : flags) {
      const bool wanted = std::find(relevant.begin(), relevant.end(), key) != relevant.end();
      if (given(entry.first)) {
        if (!wanted) {
          throw Error(ErrorKind::InvalidParameter,
                      fmt::format("key '{}' does not apply to variant '{}'", key, v));
        }
        keys[key] = *entry.second;
      } else if (wanted && !keys.count(key)) {
        keys[key] = *entry.second;
      }
    }
    return UrnFunction::from_keys(keys);
  }
};

void write_text(const Command& cmd, const std::string& text, std::ostream& out) {
  if (cmd.out_path() == "-") {
    out << text;
    return;
  }
  std::ofstream file(cmd.out_path(), std::ios::binary);
  if (!file) throw Error(ErrorKind::Domain, fmt::format("cannot open '{}' for writing", cmd.out_path()));
  file << text;
  if (!file) throw Error(ErrorKind::Domain, fmt::format("failed writing '{}'", cmd.out_path()));
}

// CSV with the echo header as its first line.
class Csv {
 public:
  Csv(const std::string& echo, const std::string& header) {
    text_ += "# " + echo + "\n" + header + "\n";
  }
  template <class... Cells>
  void row(const Cells&... cells) {
    std::string line;
    ((line += (line.empty() ? "" : ",") + cell(cells)), ...);
    text_ += line + "\n";
  }
  const std::string& text() const { return text_; }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(std::int64_t v) { return fmt::format("{}", v); }
  static std::string cell(int v) { return fmt::format("{}", v); }
  static std::string cell(std::size_t v) { return fmt::format("{}", v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::string text_;
};

std::string json_text(const Json& j) { return j.dump(2) + "\n"; }

std::string optional_cell(const std::optional<double>& v) { return v ? num(*v) : "nan"; }

class PiCurve : public Command {
 public:
  explicit PiCurve(CLI::App& app) : Command(app, "pi-curve", "Tabulate pi(y) and pi'(y)") {
    urn_.add(this->app());
    option("points", points_, "Grid points on [0, 1]");
  }
  void execute(std::ostream& out) override {
    const auto f = urn_.resolve();
    if (points_ < 2) throw UsageError("--points must be at least 2");
    Csv csv(echo(f.to_string()), "y,pi,pi_prime");
    for (std::int64_t i = 0; i < points_; ++i) {
      const double y = static_cast<double>(i) / static_cast<double>(points_ - 1);
      double d = kNaN;
      try {
        d = f.derivative(y);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::NonDifferentiable) throw;
      }
      csv.row(y, f(y), d);
    }
    write_text(*this, csv.text(), out);
  }

 private:
  UrnArgs urn_;
  std::int64_t points_ = 1001;
};

// Horizon and initial state shared by process-level commands.
struct StartArgs {
  std::int64_t t0 = 2;
  std::int64_t c0 = 1;
  void add(Command& cmd) {
    cmd.option("t0", t0, "Initial time");
    cmd.option("c0", c0, "Initial black count");
  }
  ProcessState state() const {
    ProcessState s{t0, c0};
    s.validate();
    return s;
  }
};

class Simulate : public Command {
 public:
  explicit Simulate(CLI::App& app) : Command(app, "simulate", "One sample path of the walk") {
    urn_.add(this->app());
    option("n", horizon_, "Horizon N");
    start_.add(*this);
    option("seed", seed_, "Master seed");
    option("every", every_, "Write every n-th state (the last is always written)");
    flag("direct", direct_, "Draw k past steps from the explicit history instead of the urn");
    flag("no-replacement", no_replacement_, "With --direct: draw the k steps without replacement");
  }
  void execute(std::ostream& out) override {
    const auto f = urn_.resolve();
    if (every_ < 1) throw UsageError("--every must be at least 1");
    SimConfig cfg;
    cfg.horizon = horizon_;
    cfg.initial = start_.state();
    cfg.seed = seed_;
    cfg.record_path = true;
    WalkResult res;
    if (direct_) {
      if (f.variant() != UrnVariant::MajorityK && f.variant() != UrnVariant::LinearK1) {
        throw Error(ErrorKind::Unsupported, "--direct needs variant majority or linear");
      }
      res = run_walk_direct(f.k(), f.p(), cfg,
                            no_replacement_ ? Extraction::WithoutReplacement : Extraction::WithReplacement);
    } else {
      if (no_replacement_) throw UsageError("--no-replacement needs --direct");
      res = run_walk(f, cfg);
    }
    Csv csv(echo(f.to_string()), "t,c,y");
    csv.row(cfg.initial.t, cfg.initial.c, cfg.initial.density());
    for (std::size_t i = 0; i < res.path.size(); ++i) {
      const auto& s = res.path[i];
      if ((i + 1) % static_cast<std::size_t>(every_) == 0 || i + 1 == res.path.size()) {
        csv.row(s.t, s.c, s.density());
      }
    }
    write_text(*this, csv.text(), out);
  }

 private:
  UrnArgs urn_;
  StartArgs start_;
  std::int64_t horizon_ = 1000;
  std::uint64_t seed_ = 0;
  std::int64_t every_ = 1;
  bool direct_ = false;
  bool no_replacement_ = false;
};

class Ensemble : public Command {
 public:
  explicit Ensemble(CLI::App& app) : Command(app, "ensemble", "Many seeded walks, summarized") {
    urn_.add(this->app());
    option("n", horizon_, "Horizon N");
    start_.add(*this);
    option("seed", seed_, "Master seed; run i uses stream i");
    option("runs", runs_, "Number of walks");
    option("attractors", attractors_, "Comma list of densities, or 'auto' for the stable crossings");
    option("delta", delta_, "Half-width of each attractor window");
    option("bins", bins_, "Histogram bins");
    flag("crossings", crossings_, "Count sign changes of the walk position");
  }
  void execute(std::ostream& out) override {
    const auto f = urn_.resolve();
    SimConfig cfg;
    cfg.horizon = horizon_;
    cfg.initial = start_.state();
    cfg.seed = seed_;
    cfg.record_crossings = crossings_;
    EnsembleOptions opts;
    opts.delta = delta_;
    opts.bins = bins_;
    if (attractors_ == "auto") {
      for (const auto& cp : find_crossings(f)) {
        if (cp.stability == Stability::Stable) opts.attractors.push_back(cp.y_star);
      }
    } else if (!attractors_.empty()) {
      opts.attractors = parse_doubles("attractors", attractors_);
    }
    const auto s = run_ensemble(f, cfg, runs_, opts);
    Json j;
    j["config"] = echo(f.to_string());
    j["n_runs"] = s.n_runs;
    j["mean_y"] = s.mean;
    j["variance_y"] = s.variance;
    j["mean_x"] = 2.0 * s.mean - 1.0;
    j["attractors"] = s.attractors;
    j["attractor_fractions"] = s.attractor_fractions;
    j["mean_crossings"] = s.mean_crossings;
    j["bin_width"] = s.bin_width;
    j["histogram"] = s.histogram;
    write_text(*this, json_text(j), out);
  }

 private:
  UrnArgs urn_;
  StartArgs start_;
  std::int64_t horizon_ = 1000;
  std::uint64_t seed_ = 0;
  std::int64_t runs_ = 1000;
  std::string attractors_ = "auto";
  double delta_ = 0.05;
  int bins_ = 100;
  bool crossings_ = false;
};

class Exact : public Command {
 public:
  explicit Exact(CLI::App& app) : Command(app, "exact", "Exact law of the black count") {
    urn_.add(this->app());
    option("n", horizon_, "Horizon N");
    start_.add(*this);
    option("window", window_, "y1,y2: report log P(y1 < y_N < y2) over --horizons instead");
    option("horizons", horizons_, "Comma list of horizons for --window");
  }
  void execute(std::ostream& out) override {
    const auto f = urn_.resolve();
    if (!window_.empty()) {
      const auto w = parse_doubles("window", window_);
      if (w.size() != 2) throw UsageError("--window takes y1,y2");
      if (horizons_.empty()) throw UsageError("--window needs --horizons");
      const auto hs = parse_ints("horizons", horizons_);
      const auto s = window_mass_scaling(f, start_.state(), w[0], w[1], hs);
      Json j;
      j["config"] = echo(f.to_string());
      j["horizons"] = s.horizons;
      j["log_mass"] = s.log_mass;
      j["slope"] = s.slope;
      j["intercept"] = s.intercept;
      j["contains_attractor"] = s.contains_attractor;
      j["warning"] = s.warning;
      write_text(*this, json_text(j), out);
      return;
    }
    const auto table = forward_distribution(f, start_.state(), horizon_);
    Csv csv(echo(f.to_string()), "c,y,log_prob");
    const double n = static_cast<double>(table.horizon);
    for (std::int64_t c = table.c_min(); c <= table.c_max(); ++c) {
      csv.row(c, static_cast<double>(c) / n, table.log_prob[static_cast<std::size_t>(c)]);
    }
    write_text(*this, csv.text(), out);
  }

 private:
  UrnArgs urn_;
  StartArgs start_;
  std::int64_t horizon_ = 1000;
  std::string window_;
  std::string horizons_;
};

class Entropy : public Command {
 public:
  explicit Entropy(CLI::App& app) : Command(app, "entropy", "Entropy density phi(y)") {
    urn_.add(this->app());
    option("method", method_, "dp | variational | legendre")
        ->check(CLI::IsMember({"dp", "variational", "legendre"}));
    start_.add(*this);
    option("n1", n1_, "First DP horizon");
    option("n2", n2_, "Second DP horizon (extrapolation assumes n2 = 2 n1)");
    option("y-min", y_min_, "Lowest density");
    option("y-max", y_max_, "Highest density");
    option("y-steps", y_steps_, "Grid intervals on [y-min, y-max]");
    option("time-steps", time_steps_, "Bellman lattice steps in tau");
    option("phi-steps", phi_steps_, "Bellman lattice points in phi");
    option("lambda-max", lambda_max_, "Largest lambda of the CGF grid (legendre)");
    option("lambda-steps", lambda_steps_, "CGF grid points (legendre)");
  }
  void execute(std::ostream& out) override {
    const auto f = urn_.resolve();
    const auto ys = uniform_grid(y_min_, y_max_, y_steps_);
    Csv csv(echo(f.to_string()), "y,phi_N1,phi_N2,phi_extrap,method");
    if (method_ == "dp") {
      const auto e = entropy_estimate(f, start_.state(), n1_, n2_, ys);
      for (std::size_t i = 0; i < ys.size(); ++i) {
        csv.row(ys[i], e.phi_n1[i], e.phi_n2[i], e.phi_extrap[i], "dp");
      }
    } else if (method_ == "variational") {
      const auto v = entropy_variational(f, ys, BellmanMesh{time_steps_, phi_steps_});
      for (std::size_t i = 0; i < ys.size(); ++i) csv.row(ys[i], kNaN, kNaN, v.phi[i], "variational");
    } else {
      if (lambda_steps_ < 3 || !(lambda_max_ > 0.0)) {
        throw UsageError("--lambda-steps must be at least 3 and --lambda-max positive");
      }
      std::vector<double> lam;
      for (std::int64_t i = 1; i <= lambda_steps_; ++i) {
        lam.push_back(lambda_max_ * static_cast<double>(i) / static_cast<double>(lambda_steps_));
      }
      const auto l = legendre(cgf_ode(f, lam), ys);
      for (std::size_t i = 0; i < ys.size(); ++i) csv.row(ys[i], kNaN, kNaN, l.phi[i], "legendre");
      if (l.warning) {
        std::cerr << "erw: warning: the Legendre infimum sits at lambda-max for some y; "
                     "those values are upper bounds (raise --lambda-max)\n";
      }
    }
    write_text(*this, csv.text(), out);
  }

 private:
  UrnArgs urn_;
  StartArgs start_;
  std::string method_ = "dp";
  std::int64_t n1_ = 2000;
  std::int64_t n2_ = 4000;
  double y_min_ = 0.0;
  double y_max_ = 1.0;
  std::int64_t y_steps_ = 100;
  int time_steps_ = 200;
  int phi_steps_ = 8000;
  double lambda_max_ = 40.0;
  std::int64_t lambda_steps_ = 4000;
};

class Equilibria : public Command {
 public:
  explicit Equilibria(CLI::App& app) : Command(app, "equilibria", "Fixed points and critical parameters") {
    urn_.add(this->app());
    option("format", format_, "json | csv")->check(CLI::IsMember({"json", "csv"}));
  }
  void execute(std::ostream& out) override {
    const auto f = urn_.resolve();
    const auto crossings = find_crossings(f);
    if (format_ == "csv") {
      Csv csv(echo(f.to_string()), "y_star,x_star,slope,stability");
      for (const auto& cp : crossings) {
        csv.row(cp.y_star, 2.0 * cp.y_star - 1.0, cp.slope, std::string(to_string(cp.stability)));
      }
      write_text(*this, csv.text(), out);
      return;
    }
    Json j;
    j["config"] = echo(f.to_string());
    j["crossings"] = Json::array();
    for (const auto& cp : crossings) {
      Json c;
      c["y_star"] = cp.y_star;
      c["x_star"] = 2.0 * cp.y_star - 1.0;
      c["slope"] = std::isfinite(cp.slope) ? Json(cp.slope) : Json(cp.slope > 0 ? "inf" : "-inf");
      c["stability"] = to_string(cp.stability);
      j["crossings"].push_back(c);
    }
    std::optional<CriticalSet> crit;
    if (f.variant() == UrnVariant::MajorityK) crit = critical_params(f.k());
    if (f.variant() == UrnVariant::LinearK1) crit = critical_params(1);
    if (f.variant() == UrnVariant::StepLimit) crit = critical_params_step_limit();
    if (crit) {
      auto field = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
      j["critical"] = {{"p_c", field(crit->p_c)},
                       {"p_star", field(crit->p_star)},
                       {"p_star_star", field(crit->p_star_star)}};
    }
    if (f.variant() == UrnVariant::MajorityK && f.k() == 3 && f.p() > 5.0 / 6.0) {
      const auto a = attractors_k3(f.p());
      j["attractors"] = {{"y_minus", a.y_minus}, {"y_plus", a.y_plus},
                         {"x_minus", a.x_minus}, {"x_plus", a.x_plus}};
    }
    write_text(*this, json_text(j), out);
  }

 private:
  UrnArgs urn_;
  std::string format_ = "json";
};

class Phase : public Command {
 public:
  explicit Phase(CLI::App& app) : Command(app, "phase", "Phase structure of the majority urn over p") {
    option("k", k_, "Extracted steps (odd)");
    option("p-min", p_min_, "Lowest p");
    option("p-max", p_max_, "Highest p");
    option("steps", steps_, "Number of p values");
  }
  void execute(std::ostream& out) override {
    if (steps_ < 2) throw UsageError("--steps must be at least 2");
    const auto grid = uniform_grid(p_min_, p_max_, steps_ - 1);
    const auto rows = phase_diagram(k_, grid);
    Csv csv(echo(), "p,x_minus,x_zero,x_plus,band_lo,band_hi,regime");
    for (const auto& r : rows) {
      csv.row(r.p, optional_cell(r.x_minus), optional_cell(r.x_zero), optional_cell(r.x_plus),
              optional_cell(r.band_lo), optional_cell(r.band_hi), r.regime);
    }
    write_text(*this, csv.text(), out);
  }

 private:
  int k_ = 3;
  double p_min_ = 0.51;
  double p_max_ = 0.99;
  std::int64_t steps_ = 97;
};

class Trajectories : public Command {
 public:
  explicit Trajectories(CLI::App& app)
      : Command(app, "trajectories", "Zero-cost trajectories from an unstable fixed point") {
    urn_.add(this->app());
    option("y-start", y_start_, "Unstable fixed point to launch from");
    option("direction", direction_, "+1 or -1");
    option("eps", eps_, "Comma list of launch offsets");
    option("eps-min", eps_min_, "Smallest offset of a log-spaced family (with --count)");
    option("eps-max", eps_max_, "Largest offset of a log-spaced family (with --count)");
    option("count", count_, "Family size; 0 uses --eps");
    option("target", target_, "Endpoint to hit; overrides the offsets");
    option("cells", cells_, "Uniform tau cells per trajectory");
    option("launch-time", launch_time_, "Time at which the path leaves the fixed point");
  }
  void execute(std::ostream& out) override {
    const auto f = urn_.resolve();
    LaunchOptions opts;
    opts.launch_time = launch_time_;
    std::vector<double> eps;
    if (!target_.empty()) {
      const double target = parse_doubles("target", target_).at(0);
      eps.push_back(zero_cost_offset_for(f, y_start_, direction_, target, opts));
    } else if (count_ > 0) {
      if (!(eps_min_ > 0.0 && eps_max_ >= eps_min_)) throw UsageError("need 0 < --eps-min <= --eps-max");
      for (std::int64_t i = 0; i < count_; ++i) {
        const double t = count_ == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count_ - 1);
        eps.push_back(eps_min_ * std::pow(eps_max_ / eps_min_, t));
      }
    } else {
      eps = parse_doubles("eps", eps_);
    }
    const auto family = zero_cost_family(f, y_start_, direction_, eps, cells_, opts);
    Csv csv(echo(f.to_string()), "traj,eps,tau,phi,u");
    for (std::size_t t = 0; t < family.size(); ++t) {
      const auto& tr = family[t];
      for (std::size_t i = 0; i < tr.tau.size(); ++i) csv.row(t, eps[t], tr.tau[i], tr.phi[i], tr.u[i]);
    }
    write_text(*this, csv.text(), out);
  }

 private:
  UrnArgs urn_;
  double y_start_ = 0.5;
  int direction_ = 1;
  std::string eps_ = "0.001";
  double eps_min_ = 1e-8;
  double eps_max_ = 0.1;
  std::int64_t count_ = 0;
  std::string target_;
  int cells_ = 1000;
  double launch_time_ = 1e-6;
};

class Cgf : public Command {
 public:
  explicit Cgf(CLI::App& app) : Command(app, "cgf", "Scaled cumulant generating function") {
    urn_.add(this->app());
    option("method", method_, "ode | closed | finite")->check(CLI::IsMember({"ode", "closed", "finite"}));
    option("lambda-min", lambda_min_, "Smallest lambda");
    option("lambda-max", lambda_max_, "Largest lambda");
    option("lambda-steps", lambda_steps_, "Grid intervals");
    option("n", horizon_, "Horizon for the finite-N method");
    start_.add(*this);
  }
  void execute(std::ostream& out) override {
    const auto f = urn_.resolve();
    const auto lam = uniform_grid(lambda_min_, lambda_max_, lambda_steps_);
    CgfCurve curve;
    if (method_ == "ode") {
      curve = cgf_ode(f, lam);
    } else if (method_ == "finite") {
      curve = cgf_finite_n(f, start_.state(), horizon_, lam);
    } else {
      if (f.variant() != UrnVariant::LinearK1 && !(f.variant() == UrnVariant::MajorityK && f.k() == 1)) {
        throw Error(ErrorKind::Unsupported, "the closed form covers the linear urn (k = 1) only");
      }
      curve = cgf_closed_form_k1(f.p(), lam);
    }
    Csv csv(echo(f.to_string()), "lambda,zeta,method");
    for (std::size_t i = 0; i < curve.lambda.size(); ++i) {
      csv.row(curve.lambda[i], curve.zeta[i], std::string(to_string(curve.method)));
    }
    write_text(*this, csv.text(), out);
  }

 private:
  UrnArgs urn_;
  StartArgs start_;
  std::string method_ = "ode";
  double lambda_min_ = 0.01;
  double lambda_max_ = 5.0;
  std::int64_t lambda_steps_ = 499;
  std::int64_t horizon_ = 4000;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return kUsage;
    case ErrorKind::Resource: return kResource;
    case ErrorKind::ConventionMismatch: return kConvention;
    default: return kDomain;
  }
}

const char* hint(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "check the urn keys and numeric options";
    case ErrorKind::NoBifurcation: return "the attractor pair exists only above the critical p";
    case ErrorKind::NoEscape: return "launch from a fixed point with slope > 1 (see 'erw equilibria')";
    case ErrorKind::Resource: return "lower the horizon";
    case ErrorKind::ConventionMismatch: return "the CGF argument left the range of pi; check the urn";
    case ErrorKind::Unsupported: return "this operation needs a different urn variant";
    default: return "check the option ranges";
  }
}

std::vector<std::string> split_ws(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::vector<std::string> read_config_tokens(const std::string& path, std::string* subcommand) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError(fmt::format("cannot read config file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<std::string> tokens;
  auto take_line = [&](const std::string& line) {
    auto words = split_ws(line);
    if (words.size() >= 2 && words[0] == "erw") {
      if (subcommand) *subcommand = words[1];
      words.erase(words.begin(), words.begin() + 2);
    }
    for (const auto& w : words) {
      if (w.find('=') != std::string::npos) tokens.push_back(w);
    }
  };

  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      throw UsageError(fmt::format("config file '{}' is not valid JSON: {}", path, e.what()));
    }
    if (j.contains("config") && j["config"].is_string()) {
      take_line(j["config"].get<std::string>());
    } else {
      for (const auto& [key, value] : j.items()) {
        if (value.is_string()) {
          tokens.push_back(key + "=" + value.get<std::string>());
        } else if (value.is_primitive() && !value.is_null()) {
          tokens.push_back(key + "=" + value.dump());
        }
      }
    }
    return tokens;
  }

  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("#", 0) == 0) {
      const std::string rest = line.substr(1);
      const auto words = split_ws(rest);
      if (!words.empty() && words[0] == "erw") take_line(rest);
      continue;
    }
    take_line(line);
  }
  return tokens;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Elephant random walk with k-step majority memory: simulation, exact laws, "
               "large deviations"};
  app.name("erw");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1, 1);

  std::vector<std::unique_ptr<Command>> commands;
  commands.push_back(std::make_unique<PiCurve>(app));
  commands.push_back(std::make_unique<Simulate>(app));
  commands.push_back(std::make_unique<Ensemble>(app));
  commands.push_back(std::make_unique<Exact>(app));
  commands.push_back(std::make_unique<Entropy>(app));
  commands.push_back(std::make_unique<Equilibria>(app));
  commands.push_back(std::make_unique<Phase>(app));
  commands.push_back(std::make_unique<Trajectories>(app));
  commands.push_back(std::make_unique<Cgf>(app));

  try {
    // settings from --config go in front of the command line so flags win
    std::vector<std::string> argv = args;
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) config_path = args[i + 1];
      if (args[i].rfind("--config=", 0) == 0) config_path = args[i].substr(9);
    }
    if (!config_path.empty() && !args.empty()) {
      std::string file_sub;
      const auto tokens = read_config_tokens(config_path, &file_sub);
      if (!file_sub.empty() && file_sub != args[0]) {
        throw UsageError(fmt::format("config file '{}' is for '{}', not '{}'", config_path, file_sub, args[0]));
      }
      std::vector<std::string> injected;
      for (const auto& t : tokens) injected.push_back("--" + t);
      argv.insert(argv.begin() + 1, injected.begin(), injected.end());
    }
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    err << "erw: usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "erw: error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  }

  for (const auto& cmd : commands) {
    if (!cmd->selected()) continue;
    try {
      cmd->execute(out);
      return kOk;
    } catch (const UsageError& e) {
      err << "erw " << cmd->name() << ": usage error: " << e.what() << "\n";
      return kUsage;
    } catch (const Error& e) {
      err << "erw " << cmd->name() << ": error (" << to_string(e.kind()) << "): " << e.what()
          << "\n  hint: " << hint(e.kind()) << "\n";
      return exit_code(e.kind());
    } catch (const std::bad_alloc&) {
      err << "erw " << cmd->name() << ": out of memory\n";
      return kResource;
    }
  }
  return kUsage;
}

}  // namespace erw::cli
