#pragma once

// Command-line driver: `iqp <simulate|bounds|feasibility|typicality|branch|scenario>`.
// Exit codes: 0 success (feasible), 2 infeasible, 1 error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "iqp/credal.hpp"
#include "iqp/csv.hpp"
#include "iqp/event_expr.hpp"
#include "iqp/scenario.hpp"
#include "iqp/typicality.hpp"

namespace iqp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

struct CommonOptions {
    std::string config_path;
    std::string scenario;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
};

namespace detail {

struct Loaded {
    ScenarioConfig config;
    QuantumSystem system;
    TrajectorySpace space;
};

inline Loaded load(const CommonOptions& opt) {
    const std::size_t cap = configured_trajectory_cap();
    ScenarioConfig cfg;
    if (!opt.config_path.empty()) {
        cfg = load_config(opt.config_path, cap);
    } else if (!opt.scenario.empty()) {
        cfg = builtin_scenario(opt.scenario);
    } else {
        throw InvalidArgument("scenario-cli", "missing config: pass --config FILE or --scenario NAME");
    }
    if (opt.seed) cfg.seed = *opt.seed;
    QuantumSystem sys = make_system(cfg, cap);
    TrajectorySpace space = TrajectorySpace::of(sys, cap);
    return {std::move(cfg), std::move(sys), std::move(space)};
}

inline std::filesystem::path write_file(const CommonOptions& opt, const std::string& name, const std::string& text) {
    const std::filesystem::path dir(opt.out_dir);
    std::filesystem::create_directories(dir);
    const std::filesystem::path path = dir / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidArgument("scenario-cli", "cannot write " + path.string());
    f << text;
    return path;
}

inline void header(std::ostream& out, const Loaded& l) {
    out << "config " << (l.config.name.empty() ? "<unnamed>" : l.config.name) << " hash "
        << hex64(config_hash(l.config)) << " (m=" << l.system.num_labels() << ", n=" << l.system.num_times()
        << ", trajectories=" << l.space.size() << ")\n";
}

inline void constraint_summary(std::ostream& out, const ConstraintSet& cs) {
    out << "constraints " << cs.family << ": emitted " << cs.emitted << ", skipped " << cs.skipped << ", filtered "
        << cs.filtered << "\n";
}

inline int cmd_simulate(const CommonOptions& opt, std::ostream& out) {
    const Loaded l = load(opt);
    header(out, l);
    out << "state\n  t  label                 re          im      |amp|^2\n";
    for (std::size_t t = 0; t < l.system.num_times(); ++t) {
        const StateVector& psi = l.system.state(t);
        for (std::size_t i = 0; i < l.system.num_labels(); ++i) {
            const complex z = psi[static_cast<Eigen::Index>(i)];
            char line[160];
            std::snprintf(line, sizeof line, "  %-2zu %-16s %11s %11s %12s\n", t, l.system.labels()[i].c_str(),
                          csv::fixed(z.real(), 6).c_str(), csv::fixed(z.imag(), 6).c_str(),
                          csv::fixed(std::norm(z), 6).c_str());
            out << line;
        }
    }
    out << "s-set weights\n";
    for (std::size_t t = 0; t < l.system.num_times(); ++t)
        for (std::size_t i = 0; i < l.system.num_labels(); ++i) {
            const SSet s{t, Region::of(l.system.num_labels(), {i})};
            out << "  " << sset_text(s) << "  " << csv::fixed(sset_state(l.system, s).weight, 6) << "\n";
        }
    if (!l.config.pairs.empty()) out << "sequential probabilities\n";
    for (const auto& [a, b] : l.config.pairs) {
        const SSet s1 = parse_sset(a, l.system.num_labels(), l.system.num_times());
        const SSet s2 = parse_sset(b, l.system.num_labels(), l.system.num_times());
        if (s2.time < s1.time) continue;
        out << "  " << a << " then " << b << "  " << csv::fixed(sequential_probability(l.system, {s1, s2}), 6)
            << "\n";
    }
    return kExitOk;
}

inline int cmd_bounds(const CommonOptions& opt, std::vector<std::string> events, std::ostream& out) {
    const Loaded l = load(opt);
    if (events.empty()) events = l.config.events;
    if (events.empty()) throw InvalidArgument("scenario-cli", "no events: pass --event or declare queries.events");
    header(out, l);
    const ConstraintSet cs = build_constraints(l.config, l.system, l.space);
    constraint_summary(out, cs);
    std::string csv_text = "event,lower,upper\n";
    for (const auto& e : events) {
        const BoundsResult b = lower_upper(cs, parse_event(e, l.space));
        if (b.status == BoundsStatus::Infeasible) {
            out << "infeasible: the credal set is empty\n";
            return kExitInfeasible;
        }
        out << csv::fixed(b.lower, 6) << ", " << csv::fixed(b.upper, 6) << "    " << e << "\n";
        csv_text += csv::quote(e) + "," + csv::fixed(b.lower) + "," + csv::fixed(b.upper) + "\n";
    }
    out << "wrote " << write_file(opt, "bounds.csv", csv_text).string() << "\n";
    return kExitOk;
}

inline int cmd_feasibility(const CommonOptions& opt, std::ostream& out) {
    const Loaded l = load(opt);
    header(out, l);
    const ConstraintSet cs = build_constraints(l.config, l.system, l.space);
    constraint_summary(out, cs);
    write_file(opt, "constraints.csv", constraints_csv(cs));
    const FeasibilityCertificate cert = feasibility(cs);
    if (cert.feasible()) {
        const auto path = write_file(opt, "certificate.csv", measure_csv(*cert.witness));
        out << "feasible: witness max violation " << csv::fixed(cert.violation, 12) << "\n";
        out << "certificate " << path.string() << "\n";
        return kExitOk;
    }
    const auto path = write_file(opt, "certificate.csv", farkas_csv(cs, *cert.farkas));
    out << "infeasible: Farkas margin " << csv::fixed(cert.farkas->margin) << "\n";
    out << "certificate " << path.string() << "\n";
    return kExitInfeasible;
}

inline int cmd_typicality(const CommonOptions& opt, const std::vector<std::string>& pair_args,
                          std::optional<double> eps, std::ostream& out) {
    const Loaded l = load(opt);
    std::vector<std::pair<std::string, std::string>> pairs = l.config.pairs;
    if (!pair_args.empty()) {
        pairs.clear();
        for (const auto& p : pair_args) {
            const auto sep = p.find(';');
            if (sep == std::string::npos)
                throw InvalidArgument("scenario-cli", "--pair expects \"<s-set>;<s-set>\", got '" + p + "'");
            pairs.emplace_back(p.substr(0, sep), p.substr(sep + 1));
        }
    }
    if (pairs.empty()) throw InvalidArgument("scenario-cli", "no pairs: pass --pair or declare queries.pairs");
    const double epsilon = eps.value_or(l.config.typicality_epsilon);
    header(out, l);
    const ConstraintSet cs = build_constraints(l.config, l.system, l.space);
    constraint_summary(out, cs);
    if (!feasibility(cs).feasible()) {
        out << "infeasible: the credal set is empty\n";
        return kExitInfeasible;
    }
    std::string csv_text = typicality_csv_header();
    for (const auto& [a, b] : pairs) {
        const SSet s1 = parse_sset(a, l.system.num_labels(), l.system.num_times());
        const SSet s2 = parse_sset(b, l.system.num_labels(), l.system.num_times());
        const TypicalityReport r = typicality_report(l.system, cs, s1, s2, epsilon);
        out << sset_text(s1) << " ~ " << sset_text(s2) << ": weight " << csv::fixed(r.weight, 6) << ", distance "
            << csv::fixed(r.distance, 6) << ", relative " << csv::fixed(r.relative_distance, 6) << ", ratio >= "
            << csv::fixed(r.measured_ratio, 6) << ", eps " << csv::fixed(r.epsilon, 9) << " -> " << r.verdict()
            << "\n";
        csv_text += typicality_csv_row(r);
    }
    out << "wrote " << write_file(opt, "typicality.csv", csv_text).string() << "\n";
    return kExitOk;
}

inline int cmd_branch(const CommonOptions& opt, const std::string& name, std::optional<double> delta,
                      std::optional<std::size_t> samples, std::ostream& out) {
    const Loaded l = load(opt);
    std::vector<BranchSpec> specs;
    for (const auto& b : l.config.branches)
        if (name.empty() || b.name == name) specs.push_back(b);
    if (specs.empty())
        throw InvalidArgument("scenario-cli", name.empty() ? "scenario declares no branches"
                                                           : "no branch named '" + name + "'");
    const double d = delta.value_or(l.config.delta);
    const std::size_t k = samples.value_or(l.config.samples);
    header(out, l);
    const ConstraintSet cs = build_constraints(l.config, l.system, l.space);
    constraint_summary(out, cs);
    if (!feasibility(cs).feasible()) {
        out << "infeasible: the credal set is empty\n";
        return kExitInfeasible;
    }
    std::string csv_text = branch_csv_header();
    bool all_pass = true;
    for (const auto& spec : specs) {
        const Branch br = scenario_branch(l.config, l.system, spec);
        const BranchBoundReport rep = verify_branch_bounds(cs, br, d, k, l.config.seed, &l.system);
        out << "branch " << br.name << ": times " << br.ssets.front().time << ".." << br.ssets.back().time
            << ", weight " << csv::fixed(br.weight, 6) << ", epsilon " << csv::fixed(rep.epsilon, 12) << ", delta "
            << csv::fixed(d, 6) << "\n";
        out << "  E(Y) >= " << csv::fixed(rep.expectation_bound, 9) << ": worst " << csv::fixed(rep.worst_expectation, 9)
            << " over " << rep.samples.size() << " samples -> " << rep.expectation_verdict() << "\n";
        out << "  P(Y <= 1 - delta) <= " << csv::fixed(rep.tail_bound, 9) << ": worst "
            << csv::fixed(rep.worst_tail, 9) << " -> " << rep.tail_verdict() << "\n";
        all_pass = all_pass && rep.passed();
        csv_text += branch_csv_rows(br, rep);
    }
    out << "wrote " << write_file(opt, "branch.csv", csv_text).string() << "\n";
    return all_pass ? kExitOk : kExitError;
}

inline int cmd_scenario(const std::string& name, const std::string& output, std::ostream& out) {
    const ScenarioConfig cfg = builtin_scenario(name);
    const std::string text = config_text(cfg);
    if (output.empty()) {
        out << text;
        return kExitOk;
    }
    std::ofstream f(output, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidArgument("scenario-cli", "cannot write " + output);
    f << text;
    return kExitOk;
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Imprecise quantum processes: credal sets on trajectory space"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "scenario config (iqp-config/1 JSON)");
        sub->add_option("--scenario", common.scenario, "built-in scenario name");
        sub->add_option("--out", common.out_dir, "directory for CSV outputs")->capture_default_str();
        sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& s) { common.seed = s; },
                                                "seed for randomized steps (default 42)");
    };

    auto* simulate = app.add_subcommand("simulate", "print Psi(t) and s-set weights");
    add_common(simulate);

    std::vector<std::string> events;
    auto* bounds = app.add_subcommand("bounds", "lower/upper probabilities of events");
    add_common(bounds);
    bounds->add_option("--event", events, "event expression, e.g. \"(t=0,{0}) & (t=1,{0})\"");

    auto* feas = app.add_subcommand("feasibility", "witness or Farkas certificate for the credal set");
    add_common(feas);

    std::vector<std::string> pairs;
    std::optional<double> eps;
    auto* typ = app.add_subcommand("typicality", "typicality reports for s-set pairs");
    add_common(typ);
    typ->add_option("--pair", pairs, "\"<s-set>;<s-set>\"");
    typ->add_option_function<double>("--eps", [&](const double& e) { eps = e; }, "typicality threshold");

    std::string branch_name;
    std::optional<double> delta;
    std::optional<std::size_t> samples;
    auto* branch = app.add_subcommand("branch", "branch-following statistics and bound checks");
    add_common(branch);
    branch->add_option("--name", branch_name, "branch name (default: all)");
    branch->add_option_function<double>("--delta", [&](const double& d) { delta = d; }, "tail threshold");
    branch->add_option_function<std::size_t>("--samples", [&](const std::size_t& s) { samples = s; },
                                             "number of sampled extreme points");

    std::string scenario_name;
    std::string scenario_output;
    auto* scen = app.add_subcommand("scenario", "emit a built-in scenario config");
    scen->add_option("name", scenario_name, "beam-splitter | mach-zehnder | spreading-packet | leaky-branch | adversarial")
        ->required();
    scen->add_option("--output", scenario_output, "write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    const auto start = std::chrono::steady_clock::now();
    int code = kExitOk;
    try {
        if (*simulate) code = detail::cmd_simulate(common, out);
        else if (*bounds) code = detail::cmd_bounds(common, events, out);
        else if (*feas) code = detail::cmd_feasibility(common, out);
        else if (*typ) code = detail::cmd_typicality(common, pairs, eps, out);
        else if (*branch) code = detail::cmd_branch(common, branch_name, delta, samples, out);
        else if (*scen) return detail::cmd_scenario(scenario_name, scenario_output, out);
    } catch (const Error& e) {
        err << "error [" << e.module() << "]: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    err << "elapsed " << csv::fixed(ms, 1) << " ms\n";
    return code;
}

}  // namespace iqp::cli
