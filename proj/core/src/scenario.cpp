#include "dptune/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dptune/errors.hpp"
#include "dptune/io.hpp"

namespace dptune {

using nlohmann::json;

std::size_t ScenarioSpec::steps() const {
  if (!(dt > 0.0) || !(duration > 0.0)) {
    throw std::invalid_argument("scenario duration and dt must be positive");
  }
  const double ratio = duration / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio)) {
    throw std::invalid_argument("scenario duration must be an integer multiple of dt");
  }
  return static_cast<std::size_t>(rounded);
}

Vec3 training_target(int episode) {
  const double h = deg_to_rad(30.0);
  switch (episode) {
    case 1: return {0.0, 0.0, 0.0};
    case 2: return {4.0, 0.0, 0.0};
    case 3: return {-4.0, 0.0, 0.0};
    case 4: return {0.0, 4.0, 0.0};
    case 5: return {0.0, -4.0, 0.0};
    case 6: return {0.0, 0.0, h};
    case 7: return {0.0, 0.0, -h};
    case 8: return {4.0, 4.0, 0.0};
    case 9: return {4.0, 0.0, h};
    case 10: return {0.0, 4.0, h};
    case 11: return {4.0, 4.0, h};
    default: throw ConfigError("training episode must be in 1..11, got " + std::to_string(episode));
  }
}

namespace {

ScenarioSpec base_scenario(const EpisodeSettings& settings) {
  ScenarioSpec s;
  s.duration = settings.duration;
  s.dt = settings.dt;
  s.filter_substeps = settings.filter_substeps;
  s.segmentation = settings.segmentation;
  s.control = settings.control;
  return s;
}

std::string direction_label(double direction) {
  const long deg = std::lround(rad_to_deg(direction));
  return std::to_string(deg);
}

}  // namespace

std::vector<ScenarioSpec> training_scenarios(const TrainingSelection& selection,
                                             const EpisodeSettings& settings) {
  if (selection.wind_directions.empty()) throw ConfigError("no wind directions selected");
  if (!(selection.wind_speed >= 0.0)) throw ConfigError("wind speed must be non-negative");
  std::vector<ScenarioSpec> out;
  for (std::size_t i = 0; i < selection.episodes.size(); ++i) {
    const int episode = selection.episodes[i];
    const Vec3 target = training_target(episode);
    auto add = [&](double direction) {
      ScenarioSpec s = base_scenario(settings);
      s.name = "episode_" + std::to_string(episode) + "_wind_" + direction_label(direction);
      s.wind = {selection.wind_speed, direction};
      s.goals = {target};
      out.push_back(std::move(s));
    };
    if (selection.one_direction_per_episode) {
      add(selection.wind_directions[i % selection.wind_directions.size()]);
    } else {
      for (double d : selection.wind_directions) add(d);
    }
  }
  return out;
}

std::vector<Vec3> four_corner_goals() {
  const double q = deg_to_rad(45.0);
  return {{5.0, 0.0, 0.0}, {5.0, 5.0, 0.0}, {5.0, 5.0, q}, {5.0, 0.0, q}, {0.0, 0.0, 0.0}};
}

ScenarioSpec four_corner_scenario(const EpisodeSettings& settings) {
  ScenarioSpec s = base_scenario(settings);
  s.name = "four_corner";
  s.wind = {0.5, deg_to_rad(30.0)};
  s.goals = four_corner_goals();
  s.switching = PhaseSwitching{};
  s.duration = s.switching.timeout * static_cast<double>(s.goals.size());
  return s;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key `" + key + "` in " + where);
  }
}

double number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing `" + key + "` in " + where);
  if (!obj.at(key).is_number()) throw ConfigError("`" + key + "` in " + where + " must be a number");
  return obj.at(key).get<double>();
}

template <typename T>
void maybe(const json& obj, const std::string& key, T& target) {
  if (!obj.contains(key)) return;
  try {
    target = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for `" + key + "`: " + e.what());
  }
}

Mat3 matrix(const json& obj, const std::string& key) {
  if (!obj.contains(key)) throw ConfigError("missing `" + key + "` in ship");
  const json& m = obj.at(key);
  if (!m.is_array() || m.size() != 3) throw ConfigError("`" + key + "` must be a 3x3 array");
  Mat3 out;
  for (int r = 0; r < 3; ++r) {
    if (!m[r].is_array() || m[r].size() != 3) throw ConfigError("`" + key + "` must be a 3x3 array");
    for (int c = 0; c < 3; ++c) {
      if (!m[r][c].is_number()) throw ConfigError("`" + key + "` entries must be numbers");
      out(r, c) = m[r][c].get<double>();
    }
  }
  return out;
}

Interval interval(const json& obj, const std::string& key, Interval fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ConfigError("`" + key + "` must be [lower, upper]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

ShipParams ship_from_json(const json& j) {
  reject_unknown(j,
                 {"M", "D", "TV", "delta_P_h", "delta_S_h", "n_P", "Lpp", "A_T", "A_L", "rho_a",
                  "wind_coefficients", "D_P", "D_S", "N_B", "Omega"},
                 "ship");
  ShipParams p;
  p.mass = matrix(j, "M");
  p.damping = matrix(j, "D");
  p.force_map = matrix(j, "TV");
  p.hover_port = number(j, "delta_P_h", "ship");
  p.hover_starboard = number(j, "delta_S_h", "ship");
  p.stern_propeller_speed = j.contains("n_P") ? number(j, "n_P", "ship") : 60.0;
  p.length_pp = number(j, "Lpp", "ship");
  p.area_transverse = number(j, "A_T", "ship");
  p.area_lateral = number(j, "A_L", "ship");
  p.air_density = number(j, "rho_a", "ship");

  if (!j.contains("wind_coefficients")) throw ConfigError("missing `wind_coefficients` in ship");
  const json& w = j.at("wind_coefficients");
  const std::string where = "ship.wind_coefficients";
  reject_unknown(w, {"XX0", "XX1", "XX3", "XX5", "YY1", "YY3", "YY5", "NN1", "NN2", "NN3"}, where);
  p.wind = WindRegressors{number(w, "XX0", where), number(w, "XX1", where), number(w, "XX3", where),
                          number(w, "XX5", where), number(w, "YY1", where), number(w, "YY3", where),
                          number(w, "YY5", where), number(w, "NN1", where), number(w, "NN2", where),
                          number(w, "NN3", where)};

  p.limits.port = interval(j, "D_P", p.limits.port);
  p.limits.starboard = interval(j, "D_S", p.limits.starboard);
  p.limits.bow = interval(j, "N_B", p.limits.bow);
  if (j.contains("Omega")) {
    const json& o = j.at("Omega");
    if (!o.is_array() || o.size() != 3) throw ConfigError("`Omega` must be a 3-vector");
    for (int k = 0; k < 3; ++k) {
      if (!o[k].is_number()) throw ConfigError("`Omega` entries must be numbers");
      p.limits.rate(k) = o[k].get<double>();
    }
  }
  ShipModel validate(p);  // throws ConfigError
  return p;
}

TrainingConfig config_from_json(const json& j) {
  reject_unknown(j, {"case", "penalty", "scenarios", "episode", "cma", "ship"}, "config");
  TrainingConfig cfg;
  if (j.contains("case")) {
    if (!j.at("case").is_number_integer()) throw ConfigError("`case` must be 1 or 2");
    cfg.case_id = j.at("case").get<int>();
  }
  cfg.penalty = PenaltyConfig::for_case(cfg.case_id);

  if (j.contains("penalty")) {
    const json& p = j.at("penalty");
    reject_unknown(p, {"w_e", "R1", "divergence_radius", "divergence_factor"}, "penalty");
    maybe(p, "w_e", cfg.penalty.filter_weight);
    maybe(p, "divergence_radius", cfg.penalty.divergence_radius);
    maybe(p, "divergence_factor", cfg.penalty.divergence_factor);
    if (p.contains("R1")) {
      std::vector<double> r1;
      maybe(p, "R1", r1);
      if (r1.size() != 3 || *std::min_element(r1.begin(), r1.end()) <= 0.0) {
        throw ConfigError("`R1` must be three positive diagonal entries");
      }
      cfg.penalty.error_weights = Vec3{r1[0], r1[1], r1[2]};
    }
  }

  if (j.contains("scenarios")) {
    const json& s = j.at("scenarios");
    reject_unknown(s, {"episodes", "wind_directions_deg", "wind_speed", "one_direction_per_episode"},
                   "scenarios");
    maybe(s, "episodes", cfg.selection.episodes);
    if (s.contains("wind_directions_deg")) {
      std::vector<double> deg;
      maybe(s, "wind_directions_deg", deg);
      cfg.selection.wind_directions.clear();
      for (double d : deg) cfg.selection.wind_directions.push_back(deg_to_rad(d));
    }
    maybe(s, "wind_speed", cfg.selection.wind_speed);
    maybe(s, "one_direction_per_episode", cfg.selection.one_direction_per_episode);
    for (int e : cfg.selection.episodes) training_target(e);  // validates
  }

  if (j.contains("episode")) {
    const json& e = j.at("episode");
    reject_unknown(e,
                   {"duration", "dt", "filter_substeps", "segment_interval", "segment_position",
                    "segment_heading_deg", "wind_feedforward", "max_condition"},
                   "episode");
    maybe(e, "duration", cfg.episode.duration);
    maybe(e, "dt", cfg.episode.dt);
    maybe(e, "filter_substeps", cfg.episode.filter_substeps);
    maybe(e, "segment_interval", cfg.episode.segmentation.interval);
    maybe(e, "segment_position", cfg.episode.segmentation.position);
    double heading_deg = rad_to_deg(cfg.episode.segmentation.heading);
    maybe(e, "segment_heading_deg", heading_deg);
    cfg.episode.segmentation.heading = deg_to_rad(heading_deg);
    maybe(e, "wind_feedforward", cfg.episode.control.wind_feedforward);
    maybe(e, "max_condition", cfg.episode.control.max_condition);
    ScenarioSpec probe;
    probe.duration = cfg.episode.duration;
    probe.dt = cfg.episode.dt;
    try {
      probe.steps();
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
  }

  if (j.contains("cma")) {
    const json& c = j.at("cma");
    reject_unknown(c,
                   {"population", "sigma0", "max_evaluations", "seed", "stagnation_generations",
                    "stagnation_tolerance", "sigma_floor", "max_condition", "repair_weight",
                    "workers"},
                   "cma");
    maybe(c, "population", cfg.cma.population);
    maybe(c, "sigma0", cfg.cma.sigma0);
    maybe(c, "max_evaluations", cfg.cma.max_evaluations);
    maybe(c, "seed", cfg.cma.seed);
    maybe(c, "stagnation_generations", cfg.cma.stagnation_generations);
    maybe(c, "stagnation_tolerance", cfg.cma.stagnation_tolerance);
    maybe(c, "sigma_floor", cfg.cma.sigma_floor);
    maybe(c, "max_condition", cfg.cma.max_condition);
    maybe(c, "repair_weight", cfg.cma.repair_weight);
    maybe(c, "workers", cfg.cma.workers);
    if (cfg.cma.population != 0 && cfg.cma.population < 4) throw ConfigError("population must be >= 4");
    if (!(cfg.cma.sigma0 > 0.0)) throw ConfigError("sigma0 must be positive");
  }

  if (j.contains("ship")) cfg.ship = ship_from_json(j.at("ship"));
  return cfg;
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace

TrainingConfig parse_config(const std::string& json_text) {
  return config_from_json(parse_json(json_text));
}

ShipParams parse_ship(const std::string& json_text) { return ship_from_json(parse_json(json_text)); }

TrainingConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void write_params(const std::filesystem::path& path, const Eigen::VectorXd& x) {
  write_labeled_values(path, DecisionVector::labels(), std::vector<double>(x.begin(), x.end()));
}

Eigen::VectorXd read_params(const std::filesystem::path& path) {
  const std::vector<double> values = read_labeled_values(path, DecisionVector::labels());
  if (!DecisionVector::in_bounds(values)) {
    throw ParameterBoundsError("parameters in " + path.string() + " are outside the search box");
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

// ---------------------------------------------------------------------------
// Commands

TrainOutcome run_training(const TrainingConfig& config, const std::filesystem::path& out_dir) {
  const ShipModel model(config.ship);
  const std::vector<ScenarioSpec> scenarios = training_scenarios(config.selection, config.episode);
  const PenaltyConfig penalty = config.penalty;

  const ObjectiveFunction f = [&](const Eigen::VectorXd& x) {
    return objective(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                     scenarios, model, penalty);
  };
  const BoxBounds bounds{DecisionVector::lower(), DecisionVector::upper()};

  TrainOutcome outcome;
  outcome.scenario_count = scenarios.size();
  outcome.optimization = optimize(f, bounds, config.cma);
  const Eigen::VectorXd& best = outcome.optimization.best_x;
  if (best.size() != static_cast<Eigen::Index>(DecisionVector::kSize)) {
    throw ConfigError("evaluation budget is smaller than one generation");
  }

  const auto [gains, filter] =
      DecisionVector::decode(std::span<const double>(best.data(), DecisionVector::kSize));
  for (const auto& s : scenarios) {
    const EpisodeResult r = run_episode(gains, filter, s, model, penalty);
    outcome.breakdown += r.breakdown;
    if (r.trace.diverged) ++outcome.diverged_episodes;
  }
  if (outcome.diverged_episodes * 2 > scenarios.size()) {
    std::cerr << "warning: best parameters diverge in " << outcome.diverged_episodes << " of "
              << scenarios.size() << " training episodes; fitness is dominated by divergence charges\n";
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_params(out_dir / "best_params.txt", best);
    std::ofstream history(out_dir / "history.csv");
    write_history_csv(history, outcome.optimization.history);
    std::ofstream summary(out_dir / "summary.txt");
    summary << "case = " << config.case_id << '\n'
            << "r1 = " << format_double(penalty.r1) << '\n'
            << "r2 = " << format_double(penalty.r2) << '\n'
            << "scenarios = " << scenarios.size() << '\n'
            << "evaluations = " << outcome.optimization.evaluations << '\n'
            << "generations = " << outcome.optimization.history.size() << '\n'
            << "restarts = " << outcome.optimization.restarts << '\n'
            << "stop_reason = " << outcome.optimization.stop_reason << '\n'
            << "objective = " << format_double(outcome.optimization.best_f) << '\n'
            << "J_e = " << format_double(outcome.breakdown.tracking) << '\n'
            << "J_uc = " << format_double(outcome.breakdown.input_excess) << '\n'
            << "J_du = " << format_double(outcome.breakdown.rate_excess) << '\n'
            << "diverged_episodes = " << outcome.diverged_episodes << '\n';
  }
  return outcome;
}

TestReport summarize_episode(const EpisodeResult& episode, const ScenarioSpec& scenario) {
  TestReport report;
  report.breakdown = episode.breakdown;
  report.diverged = episode.trace.diverged;
  const auto& records = episode.trace.records;
  // Lost steps after a divergence count as exceeding.
  const double planned = static_cast<double>(std::max<std::size_t>(episode.trace.planned_steps, 1));
  const double lost = static_cast<double>(episode.trace.planned_steps - records.size());

  std::size_t input_steps = 0, rate_steps = 0, any_steps = 0;
  for (const auto& r : records) {
    const bool in = (r.input_excess.array() != 0.0).any();
    const bool ra = (r.rate_excess.array() != 0.0).any();
    input_steps += in;
    rate_steps += ra;
    any_steps += (in || ra);
  }
  report.input_excess_fraction = (static_cast<double>(input_steps) + lost) / planned;
  report.rate_excess_fraction = (static_cast<double>(rate_steps) + lost) / planned;
  report.any_excess_fraction = (static_cast<double>(any_steps) + lost) / planned;

  const Vec3 goal = scenario.goals.back();
  if (!records.empty() && !report.diverged) {
    const Pose& p = records.back().state.pose;
    report.final_position_error = std::hypot(p.x - goal.x(), p.y - goal.y());
    report.final_heading_error = std::abs(wrap_to_pi(p.psi - goal.z()));
  } else {
    report.final_position_error = std::numeric_limits<double>::infinity();
    report.final_heading_error = std::numeric_limits<double>::infinity();
  }

  std::vector<PhaseStats> phases(scenario.goals.size());
  for (std::size_t i = 0; i < phases.size(); ++i) phases[i].phase = i;
  for (const auto& r : records) {
    auto& ph = phases[r.phase];
    const Pose& p = r.state.pose;
    const double dx = p.x - r.filtered_reference.x();
    const double dy = p.y - r.filtered_reference.y();
    const double dpsi = wrap_to_pi(p.psi - r.filtered_reference.z());
    ph.position_rms += dx * dx + dy * dy;
    ph.heading_rms += dpsi * dpsi;
    ++ph.steps;
  }
  for (auto& ph : phases) {
    if (ph.steps > 0) {
      ph.position_rms = std::sqrt(ph.position_rms / static_cast<double>(ph.steps));
      ph.heading_rms = std::sqrt(ph.heading_rms / static_cast<double>(ph.steps));
    }
  }
  report.phases = std::move(phases);
  return report;
}

EpisodeResult run_scenario(const Eigen::VectorXd& x, const ScenarioSpec& scenario,
                           const TrainingConfig& config, const std::filesystem::path& out_dir,
                           TestReport* report) {
  const ShipModel model(config.ship);
  const auto [gains, filter] =
      DecisionVector::decode(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  EpisodeResult result = run_episode(gains, filter, scenario, model, config.penalty);
  const TestReport summary = summarize_episode(result, scenario);
  if (report != nullptr) *report = summary;

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::ofstream trace(out_dir / ("trace_" + scenario.name + ".csv"));
    write_trace_csv(trace, result.trace);
    std::ofstream out(out_dir / "summary.txt");
    out << "scenario = " << scenario.name << '\n'
        << "case = " << config.case_id << '\n'
        << "steps = " << result.trace.records.size() << '\n'
        << "diverged = " << (summary.diverged ? "true" : "false") << '\n'
        << "J_e = " << format_double(summary.breakdown.tracking) << '\n'
        << "J_uc = " << format_double(summary.breakdown.input_excess) << '\n'
        << "J_du = " << format_double(summary.breakdown.rate_excess) << '\n'
        << "J_total = " << format_double(summary.breakdown.total()) << '\n'
        << "input_excess_fraction = " << format_double(summary.input_excess_fraction) << '\n'
        << "rate_excess_fraction = " << format_double(summary.rate_excess_fraction) << '\n'
        << "any_excess_fraction = " << format_double(summary.any_excess_fraction) << '\n'
        << "final_position_error = " << format_double(summary.final_position_error) << '\n'
        << "final_heading_error = " << format_double(summary.final_heading_error) << '\n';
    for (const auto& ph : summary.phases) {
      out << "phase_" << ph.phase + 1 << "_steps = " << ph.steps << '\n'
          << "phase_" << ph.phase + 1 << "_position_rms = " << format_double(ph.position_rms) << '\n'
          << "phase_" << ph.phase + 1 << "_heading_rms = " << format_double(ph.heading_rms) << '\n';
    }
  }
  return result;
}

ScenarioSpec select_scenario(const std::string& selector, const TrainingConfig& config) {
  if (selector == "four_corner") return four_corner_scenario(config.episode);
  const auto scenarios = training_scenarios(config.selection, config.episode);
  if (selector.rfind("train_", 0) == 0) {
    std::size_t idx = 0;
    try {
      idx = std::stoul(selector.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("bad scenario selector " + selector);
    }
    if (idx >= scenarios.size()) throw ConfigError("scenario index out of range: " + selector);
    return scenarios[idx];
  }
  for (const auto& s : scenarios) {
    if (s.name == selector) return s;
  }
  // Named episodes outside the configured selection are still reachable.
  TrainingSelection all;
  for (const auto& s : training_scenarios(all, config.episode)) {
    if (s.name == selector) return s;
  }
  throw ConfigError("unknown scenario " + selector);
}

}  // namespace dptune
