#include "lobforge/cli.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lobforge/book_io.hpp"
#include "lobforge/centred.hpp"
#include "lobforge/errors.hpp"
#include "lobforge/experiments.hpp"
#include "lobforge/market_data.hpp"

namespace lobforge {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Common {
  std::string out_dir = ".";
  int threads = 0;
  std::string config;
};

// Resolved option values of one subcommand, for the manifest.
json option_values(const CLI::App& app) {
  json j = json::object();
  for (const CLI::Option* opt : app.get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    if (opt->count() > 0) {
      const auto res = opt->reduced_results();
      j[name] = res.size() == 1 ? json(res[0]) : json(res);
    } else if (!opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    }
  }
  return j;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& s : split_list(text, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(s, &used));
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::logic_error&) {
      throw CLI::ValidationError(flag, "expected a comma-separated list of numbers, got '" + text + "'");
    }
  }
  return out;
}

std::vector<Depth> parse_depths(const std::string& text, const std::string& flag) {
  std::vector<Depth> out;
  for (double v : parse_doubles(text, flag)) {
    if (v < 1 || v != std::floor(v)) throw CLI::ValidationError(flag, "depths are positive integers");
    out.push_back(static_cast<Depth>(v));
  }
  return out;
}

std::vector<Depth> range_depths(Depth n) {
  std::vector<Depth> out;
  for (Depth k = 1; k <= n; ++k) out.push_back(k);
  return out;
}

// "A" or "AxB": depths 1..A for the ask and 1..B for the bid.
std::pair<std::vector<Depth>, std::vector<Depth>> parse_grid(const std::string& text) {
  const auto parts = split_list(text, 'x');
  const bool shaped = text.find('x') == std::string::npos ? parts.size() == 1 : parts.size() == 2;
  if (!shaped || text.front() == 'x' || text.back() == 'x')
    throw CLI::ValidationError("--grid", "expected AxB, got '" + text + "'");
  std::vector<Depth> v;
  for (const auto& p : parts) v.push_back(parse_depths(p, "--grid").at(0));
  return {range_depths(v[0]), range_depths(v.size() == 2 ? v[1] : v[0])};
}

ModelPtr resolve_model(const std::string& spec, Depth n) {
  if (fs::exists(spec)) return load_model(spec);
  if (spec == "modelA") {
    ModelAParams p;
    p.n = n;
    return build_modelA(p);
  }
  if (spec == "modelB") return build_modelB(default_modelB_params(n));
  throw CLI::ValidationError("--model", "no model file or built-in named '" + spec + "'");
}

// "--origin b1,..,bd/s1,..,sd" or a book file.
BookState resolve_origin(const std::string& book, const std::string& origin) {
  if (!book.empty()) return load_book(book);
  const auto halves = split_list(origin, '/');
  if (halves.size() != 2) throw CLI::ValidationError("--origin", "expected buy depths/sell depths");
  Side buy, sell;
  for (double v : parse_doubles(halves[0], "--origin")) buy.push_back(static_cast<Depth>(v));
  for (double v : parse_doubles(halves[1], "--origin")) sell.push_back(static_cast<Depth>(v));
  return BookState(buy, sell);
}

std::string event_kind_text(EventKind k) { return std::string(to_string(k)); }

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Session {
 public:
  Session(std::ostream& out, const Common& common) : out_(out), common_(common) {}

  void write(const std::string& name, const std::string& content, bool echo = true) {
    fs::create_directories(common_.out_dir);
    const fs::path path = fs::path(common_.out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::BadParameter, "cannot write " + path.string());
    f << content;
    outputs_.push_back(name);
    if (echo) out_ << content;
  }

  void manifest(const std::string& verb, const CLI::App& sub, const std::vector<std::string>& args, json extra = {}) {
    json m;
    m["command"] = verb;
    m["version"] = kVersion;
    m["args"] = args;
    m["options"] = option_values(sub);
    m["threads"] = omp_get_max_threads();
    m["outputs"] = outputs_;
    if (!extra.is_null()) m["results"] = std::move(extra);
    write("manifest_" + verb + ".json", m.dump(2) + "\n", false);
  }

 private:
  std::ostream& out_;
  const Common& common_;
  std::vector<std::string> outputs_;
};

// A JSON config file turns into "--key value" arguments placed before the
// command line ones, so explicit flags win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  for (std::size_t i = 0; i + 1 < args.size(); ++i) {
    if (args[i] != "--config") continue;
    std::ifstream in(args[i + 1]);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + args[i + 1]);
    json cfg;
    try {
      in >> cfg;
    } catch (const json::exception& e) {
      throw CLI::ValidationError("--config", e.what());
    }
    if (!cfg.is_object()) throw CLI::ValidationError("--config", "config must be a JSON object");
    std::vector<std::string> injected;
    for (const auto& [k, v] : cfg.items()) {
      if (v.is_boolean()) {
        if (v.get<bool>()) injected.push_back("--" + k);
        continue;
      }
      injected.push_back("--" + k);
      injected.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    }
    args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
    // The subcommand name is the first argument; config values follow it.
    const std::size_t at = args.empty() ? 0 : 1;
    args.insert(args.begin() + static_cast<long>(std::min(at, args.size())), injected.begin(), injected.end());
    break;
  }
  return args;
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("LOBFORGE_THREADS")) {
      char* end = nullptr;
      const long v = std::strtol(env, &end, 10);
      if (end == env || *end != '\0' || v <= 0) throw CLI::ValidationError("LOBFORGE_THREADS", "must be a positive integer");
      threads = static_cast<int>(v);
    }
  }
  if (threads > 0) omp_set_num_threads(threads);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);

  CLI::App app{"Limit order book clearing, simulation and Kolmogorov solver"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out_dir, "Output directory");
    sub->add_option("--threads", common.threads, "Worker threads (LOBFORGE_THREADS if unset)")->check(CLI::NonNegativeNumber);
  };

  // clear
  std::string book_path, events_path, centred_path;
  CLI::App* clear_cmd = app.add_subcommand("clear", "Clear a book, optionally after a batch of events");
  clear_cmd->add_option("--book", book_path, "Book file (.json or .csv)");
  clear_cmd->add_option("--events", events_path, "Events CSV (kind,price,size)");
  clear_cmd->add_option("--centred", centred_path, "Centred book JSON to clear instead");
  add_common(clear_cmd);

  // shared model and origin flags
  std::string model_spec = "modelB", origin_spec = "2,4,1,0,0,0/0,0,0,1,4,2";
  Depth n = 300;
  std::uint64_t seed = 1;
  std::size_t reps = 500;
  double T = 0.2, dt = 5e-4, eps = 1e-8;
  std::size_t max_events = 1'000'000;
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", model_spec, "Model file or built-in name (modelA, modelB)");
    sub->add_option("--n", n, "Queue cap for built-in models")->check(CLI::PositiveNumber);
  };
  auto add_origin = [&](CLI::App* sub) {
    sub->add_option("--book", book_path, "Origin book file");
    sub->add_option("--origin", origin_spec, "Origin as buy depths/sell depths");
  };

  // simulate
  std::string stop = "horizon", move = "ask";
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Simulate paths and estimate probabilities");
  add_model(sim_cmd);
  add_origin(sim_cmd);
  sim_cmd->add_option("--stop", stop, "horizon, first-move or max-events")
      ->check(CLI::IsMember({"horizon", "first-move", "max-events"}));
  sim_cmd->add_option("--T", T, "Horizon in seconds")->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--max-events", max_events, "Event budget per replication");
  sim_cmd->add_option("--move", move, "First-move price: ask or mid")->check(CLI::IsMember({"ask", "mid"}));
  sim_cmd->add_option("--seed", seed, "Base seed");
  sim_cmd->add_option("--reps", reps, "Replications for the estimate");
  add_common(sim_cmd);

  // kbe
  bool convergence_flag = false;
  std::string dts_text = "0.005,0.0025,0.00125,0.000625", grid_text;
  double dt_min = 1.25e-4;
  CLI::App* kbe_cmd = app.add_subcommand("kbe", "Solve the backward Kolmogorov equation");
  add_model(kbe_cmd);
  add_origin(kbe_cmd);
  kbe_cmd->add_option("--T", T, "Horizon in seconds")->check(CLI::PositiveNumber);
  kbe_cmd->add_option("--dt", dt, "Time step")->check(CLI::PositiveNumber);
  kbe_cmd->add_option("--eps", eps, "Pruning threshold")->check(CLI::NonNegativeNumber);
  kbe_cmd->add_option("--grid", grid_text, "AxB grid of canonical origins");
  kbe_cmd->add_flag("--convergence", convergence_flag, "Run the convergence study");
  kbe_cmd->add_option("--dts", dts_text, "Steps for the convergence study");
  kbe_cmd->add_option("--dt-min", dt_min, "Reference step")->check(CLI::PositiveNumber);
  add_common(kbe_cmd);

  // convergence
  CLI::App* conv_cmd = app.add_subcommand("convergence", "Euler convergence study of the Kolmogorov solver");
  add_model(conv_cmd);
  add_origin(conv_cmd);
  conv_cmd->add_option("--T", T, "Horizon in seconds")->check(CLI::PositiveNumber);
  conv_cmd->add_option("--eps", eps, "Pruning threshold")->check(CLI::NonNegativeNumber);
  conv_cmd->add_option("--dts", dts_text, "Steps for the study");
  conv_cmd->add_option("--dt-min", dt_min, "Reference step")->check(CLI::PositiveNumber);
  add_common(conv_cmd);

  // calibrate
  std::string messages_path, snapshot_path, scheme = "B";
  int d = 6, relative_origin = 0;
  std::int64_t unit = 100, tick = 100;
  Depth max_size = 6;
  CLI::App* cal_cmd = app.add_subcommand("calibrate", "Count-based calibration from LOBSTER messages");
  cal_cmd->add_option("--messages", messages_path, "LOBSTER message CSV")->required();
  cal_cmd->add_option("--snapshot", snapshot_path, "Order book snapshot row preceding the messages");
  cal_cmd->add_option("--scheme", scheme, "A or B")->check(CLI::IsMember({"A", "B"}));
  cal_cmd->add_option("--d", d, "Price levels")->check(CLI::PositiveNumber);
  cal_cmd->add_option("--unit", unit, "Shares per volume unit")->check(CLI::PositiveNumber);
  cal_cmd->add_option("--tick", tick, "Price units per tick")->check(CLI::PositiveNumber);
  cal_cmd->add_option("--max-size", max_size, "Largest size bucket")->check(CLI::PositiveNumber);
  cal_cmd->add_option("--n", n, "Queue cap of the calibrated model")->check(CLI::PositiveNumber);
  cal_cmd->add_option("--relative-origin", relative_origin, "Relative price of the first matrix column");
  add_common(cal_cmd);

  // compare
  std::string asks_text, bids_text;
  bool skip_kbe = false;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "Monte Carlo against the Kolmogorov solver on a depth grid");
  add_model(cmp_cmd);
  cmp_cmd->add_option("--grid", grid_text, "AxB grid of ask and bid depths");
  cmp_cmd->add_option("--asks", asks_text, "Ask depths, comma separated");
  cmp_cmd->add_option("--bids", bids_text, "Bid depths, comma separated");
  cmp_cmd->add_option("--T", T, "Horizon in seconds")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--dt", dt, "Time step")->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--eps", eps, "Pruning threshold")->check(CLI::NonNegativeNumber);
  cmp_cmd->add_option("--reps", reps, "Replications per cell");
  cmp_cmd->add_option("--seed", seed, "Base seed");
  cmp_cmd->add_option("--max-events", max_events, "Event budget per replication");
  cmp_cmd->add_flag("--skip-kbe", skip_kbe, "Monte Carlo only");
  add_common(cmp_cmd);

  // validate-model
  std::size_t n_states = 10000;
  Depth state_depth = 9;
  CLI::App* val_cmd = app.add_subcommand("validate-model", "Check a model against the rate assumptions");
  add_model(val_cmd);
  val_cmd->add_option("--states", n_states, "Random states to check");
  val_cmd->add_option("--max-depth", state_depth, "Largest queue in random states");
  val_cmd->add_option("--d", d, "Price levels of random states")->check(CLI::PositiveNumber);
  val_cmd->add_option("--seed", seed, "Seed for the random states");
  add_common(val_cmd);

  try {
    args = expand_config(args);
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    apply_threads(common.threads);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  }

  Session session(out, common);
  try {
    if (*clear_cmd) {
      if (!centred_path.empty()) {
        std::ifstream in(centred_path);
        if (!in) throw Error(ErrorCode::BadParameter, "cannot open " + centred_path);
        json j;
        in >> j;
        const CentredState cleared = clear_centred(centred_from_json(j));
        session.write("cleared_centred.json", centred_to_json(cleared).dump(2) + "\n");
      } else {
        if (book_path.empty()) throw CLI::RequiredError("--book or --centred");
        const BookState x = load_book(book_path);
        const ClearingResult r = events_path.empty() ? clear(x) : clear_batch(x, load_events(events_path));
        session.write("clearing.json", clearing_result_to_json(r).dump(2) + "\n");
      }
      session.manifest("clear", *clear_cmd, args);
    } else if (*sim_cmd) {
      const ModelPtr model = resolve_model(model_spec, n);
      const BookState x0 = resolve_origin(book_path, origin_spec);
      StopRule rule;
      rule.kind = stop == "horizon" ? StopKind::Horizon : stop == "first-move" ? StopKind::FirstMove : StopKind::MaxEvents;
      rule.horizon = T;
      rule.max_events = max_events;
      rule.move = move == "mid" ? MoveSemantics::Mid : MoveSemantics::Ask;
      RngStream rng(replication_seed(seed, 0));
      const PathRecord path = simulate_path(*model, x0, rule, rng);
      std::ostringstream csv;
      csv << "time,kind,price,size,ask,bid\n";
      csv << num(0.0) << ",origin,,," << path.ask[0] << ',' << path.bid[0] << '\n';
      for (std::size_t k = 0; k < path.events.size(); ++k)
        csv << num(path.times[k + 1]) << ',' << event_kind_text(path.events[k].kind) << ',' << path.events[k].price << ','
            << path.events[k].size << ',' << path.ask[k + 1] << ',' << path.bid[k + 1] << '\n';
      session.write("path.csv", csv.str(), false);
      json results;
      results["path_events"] = path.events.size();
      if (rule.kind != StopKind::MaxEvents && reps >= 2) {
        McOptions opt;
        opt.reps = reps;
        opt.seed = seed;
        opt.max_events = max_events;
        opt.move = rule.move;
        const Estimate e = rule.kind == StopKind::Horizon ? estimate_horizon(*model, x0, T, opt)
                                                          : estimate_first_move(*model, x0, opt);
        json ej = {{"mean", e.mean}, {"std_error", e.std_error}, {"n", e.n},
                   {"seed", e.seed}, {"timeouts", e.timeouts},   {"dead", e.dead}};
        session.write("estimate.json", ej.dump(2) + "\n");
        results["estimate"] = ej;
      } else {
        out << "path with " << path.events.size() << " events written to path.csv\n";
      }
      session.manifest("simulate", *sim_cmd, args, results);
    } else if (*kbe_cmd || *conv_cmd) {
      const ModelPtr model = resolve_model(model_spec, n);
      const CLI::App& sub = *kbe_cmd ? *kbe_cmd : *conv_cmd;
      const std::string verb = *kbe_cmd ? "kbe" : "convergence";
      if (*conv_cmd || convergence_flag) {
        KbeProblem p;
        p.model = model;
        p.origin = resolve_origin(book_path, origin_spec);
        p.terminal = ask_increase_indicator(p.origin);
        p.T = T;
        p.dt = dt_min;
        p.pruning_eps = eps;
        KbeDiagnostics dg;
        const auto pts = convergence_study(p, parse_doubles(dts_text, "--dts"), dt_min, &dg);
        std::ostringstream csv;
        csv << "dt,value,error\n";
        for (const auto& q : pts) csv << num(q.dt) << ',' << num(q.value) << ',' << num(q.error) << '\n';
        session.write("convergence.csv", csv.str());
        json results = {{"slope", loglog_slope(pts)}, {"explored_states", dg.explored_states}, {"seconds", dg.seconds}};
        session.manifest(verb, sub, args, results);
      } else if (!grid_text.empty()) {
        const auto [asks, bids] = parse_grid(grid_text);
        std::ostringstream csv;
        csv << "ask_depth,bid_depth,probability\n";
        for (Depth a : asks)
          for (Depth b : bids)
            csv << a << ',' << b << ',' << num(ask_increase_probability(model, canonical_origin(b, a), T, dt, eps)) << '\n';
        session.write("kbe_grid.csv", csv.str());
        session.manifest(verb, sub, args);
      } else {
        KbeDiagnostics dg;
        const double v = ask_increase_probability(model, resolve_origin(book_path, origin_spec), T, dt, eps, &dg);
        json j = {{"probability", v},
                  {"steps", dg.steps},
                  {"uniform_rate", dg.uniform_rate},
                  {"explored_states", dg.explored_states},
                  {"pruned_mass", dg.pruned_mass},
                  {"truncated_weight", dg.truncated_weight},
                  {"seconds", dg.seconds}};
        session.write("kbe.json", j.dump(2) + "\n");
        session.manifest(verb, sub, args);
      }
    } else if (*cal_cmd) {
      CalibrationOptions opt;
      opt.scheme = scheme == "A" ? Scheme::ModelA : Scheme::ModelB;
      opt.d = d;
      opt.unit_size = unit;
      opt.tick = tick;
      opt.max_size = max_size;
      opt.n = n;
      opt.relative_origin = relative_origin;
      if (!snapshot_path.empty()) {
        std::ifstream in(snapshot_path);
        std::string line;
        if (!in || !std::getline(in, line)) throw Error(ErrorCode::BadParameter, "cannot read " + snapshot_path);
        opt.initial_book = parse_snapshot_row(line);
      }
      const MessageStream s = parse_messages_file(messages_path);
      CalibrationReport rep = calibrate(s.records, opt);
      json rj = rep.to_json();
      rj["skipped_message_types"] = s.skipped;
      for (const auto& w : rep.warnings) err << "warning: " << w << "\n";
      session.write("calibration.json", rj.dump(2) + "\n");
      session.write("model.json", model_to_json(*rep.model).dump(2) + "\n", false);
      session.manifest("calibrate", *cal_cmd, args);
    } else if (*cmp_cmd) {
      const ModelPtr model = resolve_model(model_spec, n);
      CompareOptions opt;
      if (!grid_text.empty()) std::tie(opt.ask_depths, opt.bid_depths) = parse_grid(grid_text);
      if (!asks_text.empty()) opt.ask_depths = parse_depths(asks_text, "--asks");
      if (!bids_text.empty()) opt.bid_depths = parse_depths(bids_text, "--bids");
      opt.T = T;
      opt.dt = dt;
      opt.pruning_eps = eps;
      opt.mc.reps = reps;
      opt.mc.seed = seed;
      opt.mc.max_events = max_events;
      opt.with_kbe = !skip_kbe;
      std::ostringstream csv;
      write_compare_csv(csv, compare_grid(model, opt));
      session.write("compare.csv", csv.str());
      session.manifest("compare", *cmp_cmd, args);
    } else if (*val_cmd) {
      const ModelPtr model = resolve_model(model_spec, n);
      if (model->frame() != Frame::Absolute) throw Error(ErrorCode::PreconditionViolated, "validate-model samples absolute books");
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<Depth> depth(0, state_depth);
      std::vector<BookState> states;
      while (states.size() < n_states) {
        // Random two-sided book: bids on levels below a random split, asks above.
        BookState x(d);
        std::uniform_int_distribution<int> split(1, std::max(1, d - 1));
        const int s = split(rng);
        for (int k = 1; k <= d; ++k) (k <= s ? x.buy : x.sell)[static_cast<std::size_t>(k - 1)] = depth(rng);
        if (is_admissible(x)) states.push_back(x);
      }
      const ValidationReport rep = validate(*model, std::span<const BookState>(states));
      json j = {{"states_checked", rep.states_checked}, {"violations", rep.violations.size()}};
      json list = json::array();
      for (std::size_t i = 0; i < std::min<std::size_t>(rep.violations.size(), 50); ++i) {
        const Violation& v = rep.violations[i];
        list.push_back({{"clause", v.clause},
                        {"state", book_to_json(states[v.state_index])},
                        {"kind", event_kind_text(v.event.kind)},
                        {"price", v.event.price},
                        {"size", v.event.size},
                        {"rate", v.rate},
                        {"bound", v.bound}});
      }
      j["first_violations"] = list;
      session.write("validation.json", j.dump(2) + "\n");
      session.manifest("validate-model", *val_cmd, args);
      if (!rep.ok()) {
        err << "model violates the rate assumptions in " << rep.violations.size() << " cases\n";
        return 1;
      }
    }
  } catch (const CLI::Error& e) {
    err << "usage error: " << e.get_name() << ": " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace lobforge
