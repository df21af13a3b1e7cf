// Batch front end: identity checks, convergence tables, maximal-constant
// measurements, ratio-set searches and Maharam invariance sweeps, driven by
// a JSON config. Outputs are deterministic: exact arithmetic, fixed
// enumeration order, rationals rendered at 17 significant digits (or as
// "p/q" with --exact).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fgb/engine.hpp"
#include "fgb/json_io.hpp"

namespace {

using fgb::Json;
using fgb::Rational;

struct CommonOptions {
  std::string config_path;
  std::string out_path;  // overrides config "out"
  bool exact = false;
  std::size_t cap = fgb::kDefaultEnumerationCap;
};

// Relative action paths are taken relative to the config file, so bundled
// configs work from any working directory.
std::string resolve_path(const CommonOptions& opts, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(opts.config_path).parent_path() / p).string();
}

std::string format_value(const Rational& q, bool exact) {
  if (exact) return fgb::rational_to_string(q);
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", fgb::rational_to_double(q));
  return buffer;
}

void deliver(const CommonOptions& opts, const Json& config, const std::string& contents) {
  std::string out = opts.out_path;
  if (out.empty()) out = config.value("out", std::string());
  if (out.empty()) {
    std::cout << contents;
  } else {
    fgb::write_file_atomic(out, contents);
  }
}

fgb::GroupMeasure config_kappa(const Json& config, int rank) {
  if (config.contains("kappa")) return fgb::measure_from_json(config.at("kappa"), rank);
  return fgb::sphere_uniform(rank, 1);
}

fgb::RelationInstance config_instance(const Json& config, const std::string& name, int rank) {
  std::optional<fgb::GroupMeasure> kappa;
  if (name == "RANDOM_WALK") kappa = config_kappa(config, rank);
  return fgb::RelationInstance::from_name(name, rank, std::move(kappa));
}

fgb::PushforwardSpec config_pushforward(const Json& config, const std::string& instance_name,
                                        int rank, std::size_t cap) {
  fgb::PushforwardSpec spec{config_instance(config, instance_name, rank),
                            config.value("N", 1), {}, 1, cap};
  if (config.contains("psi")) spec.psi = fgb::density_from_json(config.at("psi"));
  spec.cyclic_modulus = config.value("K", 1);
  return spec;
}

// The closed form each instance's push-forward must reproduce.
fgb::GroupMeasure expected_measure(const fgb::RelationInstance& instance, int index,
                                   std::size_t cap) {
  switch (instance.kind()) {
    case fgb::RelationInstance::Kind::Tail:
      return fgb::sphere_uniform(instance.rank(), 2 * index, cap);
    case fgb::RelationInstance::Kind::RandomWalk:
      return fgb::cesaro_convolutions(instance.kappa(), index, cap);
    case fgb::RelationInstance::Kind::DoubleBoundaryShift:
      return fgb::cesaro_spheres(instance.rank(), index, cap);
  }
  throw fgb::InputError("unreachable instance kind");
}

int cmd_identity(const CommonOptions& opts) {
  Json config = fgb::read_json_file(opts.config_path);
  const int rank = config.at("r").get<int>();
  const int truncation = config.value("N", 2);
  std::vector<std::string> names =
      config.value("instances", std::vector<std::string>{"TAIL", "RANDOM_WALK",
                                                         "DOUBLE_BOUNDARY_SHIFT"});
  Json report;
  report["r"] = rank;
  report["N"] = truncation;
  report["results"] = Json::array();
  bool all_match = true;
  for (const auto& name : names) {
    fgb::PushforwardSpec spec = config_pushforward(config, name, rank, opts.cap);
    spec.truncation = truncation;
    auto family = fgb::pushforward_family(spec);
    for (int index = 1; index <= truncation; ++index) {
      fgb::GroupMeasure computed = family[static_cast<std::size_t>(index - 1)];
      if (config.contains("inject_error")) {
        const Json& inject = config.at("inject_error");
        if (inject.at("instance").get<std::string>() == name &&
            inject.at("index").get<int>() == index) {
          // Test fixture: perturb one pushforward weight, renormalizing on a
          // second word so the corrupted object is still a measure.
          auto weights = computed.weights();
          fgb::ReducedWord word =
              fgb::ReducedWord::parse(inject.at("word").get<std::string>(), rank);
          Rational delta = fgb::rational_from_string(inject.at("delta").get<std::string>());
          weights[word] += delta;
          weights[weights.begin()->first] -= delta;
          computed = fgb::GroupMeasure::from_weights(std::move(weights));
        }
      }
      fgb::GroupMeasure expected = expected_measure(spec.instance, index, opts.cap);
      bool match = computed == expected;
      Json entry;
      entry["instance"] = name;
      entry["index"] = index;
      entry["match"] = match;
      entry["computed"] = fgb::measure_to_json(computed);
      entry["expected"] = fgb::measure_to_json(expected);
      if (!match) {
        all_match = false;
        // Locate the first discrepancy in canonical word order.
        Json where;
        auto lhs = computed.weights();
        auto rhs = expected.weights();
        auto il = lhs.begin();
        auto ir = rhs.begin();
        while (il != lhs.end() || ir != rhs.end()) {
          if (ir == rhs.end() || (il != lhs.end() && il->first < ir->first)) {
            where = {{"word", il->first.str()},
                     {"lhs", fgb::rational_to_string(il->second)},
                     {"rhs", "0"}};
            break;
          }
          if (il == lhs.end() || ir->first < il->first) {
            where = {{"word", ir->first.str()},
                     {"lhs", "0"},
                     {"rhs", fgb::rational_to_string(ir->second)}};
            break;
          }
          if (il->second != ir->second) {
            where = {{"word", il->first.str()},
                     {"lhs", fgb::rational_to_string(il->second)},
                     {"rhs", fgb::rational_to_string(ir->second)}};
            break;
          }
          ++il;
          ++ir;
        }
        entry["first_discrepancy"] = where;
        std::cerr << "FAIL " << name << " n=" << index << " at "
                  << where.value("word", std::string("?")) << ": lhs "
                  << where.value("lhs", std::string("?")) << " rhs "
                  << where.value("rhs", std::string("?")) << "\n";
      }
      report["results"].push_back(std::move(entry));
    }
  }
  report["all_match"] = all_match;
  deliver(opts, config, report.dump(2) + "\n");
  return all_match ? 0 : 1;
}

int cmd_converge(const CommonOptions& opts) {
  Json config = fgb::read_json_file(opts.config_path);
  const int rank = config.at("r").get<int>();
  fgb::FiniteAction act =
      fgb::action_from_file(resolve_path(opts, config.at("action").get<std::string>()));
  fgb::Observable f = fgb::observable_from_json(config.at("observable"), act);
  fgb::InvariantTarget target =
      fgb::invariant_target_from_name(config.value("target", std::string("F2")));
  fgb::PushforwardSpec spec =
      config_pushforward(config, config.value("instance", std::string("TAIL")), rank, opts.cap);
  auto rows = fgb::convergence_experiment(spec, act, f, target);
  std::string csv = "index,sup_error,l1_error\n";
  for (const auto& row : rows) {
    csv += std::to_string(row.index) + "," + format_value(row.sup_error, opts.exact) + "," +
           format_value(row.l1_error, opts.exact) + "\n";
  }
  deliver(opts, config, csv);
  return 0;
}

int cmd_maximal(const CommonOptions& opts) {
  Json config = fgb::read_json_file(opts.config_path);
  const int rank = config.at("r").get<int>();
  std::vector<fgb::GroupMeasure> family;
  std::string family_kind = config.value("family", std::string("pushforward"));
  if (family_kind == "delta_e") {
    family.push_back(fgb::GroupMeasure::dirac());
  } else if (family_kind == "pushforward") {
    fgb::PushforwardSpec spec = config_pushforward(
        config, config.value("instance", std::string("TAIL")), rank, opts.cap);
    family = fgb::pushforward_family(spec);
  } else {
    throw fgb::InputError("family must be \"pushforward\" or \"delta_e\"");
  }
  Json report;
  report["family"] = family_kind;
  report["members"] = static_cast<int>(family.size());
  report["actions"] = Json::array();
  for (const auto& path : config.at("actions")) {
    fgb::FiniteAction act = fgb::action_from_file(resolve_path(opts, path.get<std::string>()));
    fgb::Observable f = fgb::observable_from_json(config.at("observable"), act);
    auto [maximal, stats] = fgb::maximal_function(family, f, act);
    Json entry;
    entry["action"] = path.get<std::string>();
    entry["weak_ratio"] = fgb::rational_to_string(stats.weak_ratio);
    entry["l2_ratio_pow"] = fgb::rational_to_string(stats.strong_ratio_pow_l2);
    entry["l4_ratio_pow"] = fgb::rational_to_string(stats.strong_ratio_pow_l4);
    entry["weak_ratio_float"] = format_value(stats.weak_ratio, false);
    entry["l2_ratio"] = stats.strong_ratio_l2;
    entry["l4_ratio"] = stats.strong_ratio_l4;
    entry["f_llogl_norm"] = stats.f_llogl_norm;
    report["actions"].push_back(std::move(entry));
  }
  deliver(opts, config, report.dump(2) + "\n");
  return 0;
}

int cmd_witness(const CommonOptions& opts) {
  Json config = fgb::read_json_file(opts.config_path);
  const int rank = config.at("r").get<int>();
  fgb::Cylinder A = fgb::Cylinder::parse(config.value("A", std::string("a")), rank);
  fgb::RatioSetQuery query;
  query.max_word_length = config.value("max_word_length", 6);
  query.max_depth = config.value("max_depth", 6);
  std::vector<Rational> targets;
  if (config.contains("target_exponents")) {
    for (const auto& e : config.at("target_exponents"))
      targets.push_back(fgb::pow_int(Rational(2 * rank - 1), e.get<long>()));
  }
  if (config.contains("targets")) {
    for (const auto& t : config.at("targets"))
      targets.push_back(fgb::rational_from_string(t.get<std::string>()));
  }
  if (targets.empty()) throw fgb::InputError("witness needs targets or target_exponents");
  Json report;
  report["A"] = A.str();
  report["witnesses"] = Json::array();
  bool all_found = true;
  for (const auto& target : targets) {
    query.target = target;
    auto witness = fgb::ratio_set_witness(rank, A, query);  // throws InputError on bad target
    Json entry;
    entry["target"] = fgb::rational_to_string(target);
    entry["found"] = witness.has_value();
    if (witness) {
      entry["subcylinder"] = witness->subcylinder.str();
      entry["g"] = witness->element.str();
    } else {
      all_found = false;
    }
    report["witnesses"].push_back(std::move(entry));
  }
  report["all_found"] = all_found;
  deliver(opts, config, report.dump(2) + "\n");
  return all_found ? 0 : 1;
}

int cmd_invariance(const CommonOptions& opts) {
  Json config = fgb::read_json_file(opts.config_path);
  const int rank = config.at("r").get<int>();
  const int max_len = config.value("max_word_length", 3);
  const int depth = config.value("cylinder_depth", 5);
  const long t_min = config.value("t_min", -2);
  const long t_max = config.value("t_max", 2);
  long checks = 0, failures = 0;
  for (const auto& g : fgb::ball(rank, max_len, opts.cap)) {
    for (const auto& word : fgb::sphere(rank, depth, opts.cap).elements) {
      fgb::Cylinder c = fgb::Cylinder::from_word(word);
      for (long t = t_min; t <= t_max; ++t) {
        ++checks;
        if (!fgb::check_maharam_invariance(rank, g, c, t).holds) ++failures;
      }
    }
  }
  Json report;
  report["r"] = rank;
  report["max_word_length"] = max_len;
  report["cylinder_depth"] = depth;
  report["fiber_range"] = {t_min, t_max};
  report["checks"] = checks;
  report["failures"] = failures;
  report["all_hold"] = failures == 0;
  deliver(opts, config, report.dump(2) + "\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact ergodic-average experiments on the free group"};
  app.require_subcommand(1);

  CommonOptions opts;
  int (*handler)(const CommonOptions&) = nullptr;
  for (auto [name, fn, help] :
       {std::tuple{"identity", &cmd_identity,
                   "check the push-forward families against their closed forms"},
        std::tuple{"converge", &cmd_converge, "emit a convergence error table as CSV"},
        std::tuple{"maximal", &cmd_maximal, "measure empirical maximal-inequality ratios"},
        std::tuple{"witness", &cmd_witness, "search for ratio-set witnesses"},
        std::tuple{"invariance", &cmd_invariance, "sweep the Maharam invariance certificate"}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opts.config_path, "JSON config path")->required();
    sub->add_option("--out", opts.out_path, "output path (overrides config)");
    sub->add_flag("--exact", opts.exact, "render rationals as p/q instead of floating point");
    sub->add_option("--cap", opts.cap, "enumeration cap");
    sub->callback([&handler, fn = fn]() { handler = fn; });
  }

  CLI11_PARSE(app, argc, argv);
  try {
    return handler(opts);
  } catch (const fgb::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const fgb::ResourceError& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
