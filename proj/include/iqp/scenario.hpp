#pragma once

// Scenario configuration ("iqp-config/1" JSON), validation, the built-in
// scenarios, and assembly of a scenario's system and constraint set.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "iqp/credal.hpp"
#include "iqp/error.hpp"
#include "iqp/event_expr.hpp"
#include "iqp/quantum.hpp"
#include "iqp/trajectory.hpp"
#include "iqp/typicality.hpp"

namespace iqp {

inline constexpr const char* kConfigSchema = "iqp-config/1";

struct StepSpec {
    std::string generator;          // hadamard | identity | dft, empty when explicit
    std::optional<Operator> matrix; // takes precedence over the generator
};

struct PairFamilySpec {
    std::size_t t1 = 0;
    std::size_t t2 = 0;
    std::size_t max_region_size = 1;
};

struct ConstraintSpec {
    std::string event;
    std::string relation = ">=";
    double rhs = 0.0;
};

struct BranchSpec {
    std::string name;
    std::vector<std::string> ssets;
};

struct ScenarioConfig {
    std::string name;

    std::vector<std::string> labels;
    std::size_t times = 1;
    std::vector<StepSpec> steps;
    std::vector<complex> initial_state;

    std::string ruleset = "born";  // none | born | qtr | qtr-min | qtr-eps | qtr-alpha
    bool include_born = true;
    double epsilon = 0.1;
    double alpha = 1.0;
    double tau_norm = kDefaultTauNorm;
    std::size_t born_max_region_size = 1;
    std::vector<PairFamilySpec> pair_family;
    std::vector<ConstraintSpec> constraints;

    std::vector<std::string> events;
    std::vector<std::pair<std::string, std::string>> pairs;
    double typicality_epsilon = 0.1;
    std::vector<BranchSpec> branches;
    double delta = 1e-3;
    std::size_t samples = 20;
    std::uint64_t seed = 42;
};

// Every problem found, each prefixed with its key path.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> problems)
        : Error("scenario-cli", join(problems)), problems_(std::move(problems)) {}

    const std::vector<std::string>& problems() const { return problems_; }

private:
    static std::string join(const std::vector<std::string>& problems) {
        std::string out = "invalid config:";
        for (const auto& p : problems) out += "\n  " + p;
        return out;
    }
    std::vector<std::string> problems_;
};

// ---------------------------------------------------------------------------
// JSON encoding

namespace detail {

using nlohmann::json;

inline json complex_json(complex z) { return json::array({z.real(), z.imag()}); }

inline json step_json(const StepSpec& s) {
    if (!s.matrix) return s.generator;
    json rows = json::array();
    for (Eigen::Index i = 0; i < s.matrix->rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < s.matrix->cols(); ++j) row.push_back(complex_json((*s.matrix)(i, j)));
        rows.push_back(row);
    }
    json out = {{"matrix", rows}};
    if (!s.generator.empty()) out["generator"] = s.generator;
    return out;
}

inline bool is_index(const json& v) {
    return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
}

// Collects problems instead of throwing on the first one.
class Reader {
public:
    std::vector<std::string> problems;

    void fail(const std::string& path, const std::string& msg) { problems.push_back(path + ": " + msg); }

    void only_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool known = false;
            for (const char* k : allowed) known = known || it.key() == k;
            if (!known) fail(path.empty() ? it.key() : path + "." + it.key(), "unknown key");
        }
    }

    const json* object(const json& parent, const char* key, const std::string& path, bool required) {
        const std::string p = path.empty() ? key : path + "." + key;
        if (!parent.contains(key)) {
            if (required) fail(p, "missing");
            return nullptr;
        }
        if (!parent[key].is_object()) {
            fail(p, "expected an object");
            return nullptr;
        }
        return &parent[key];
    }

    template <typename T>
    void get(const json& parent, const char* key, const std::string& path, T& out, bool required = false) {
        const std::string p = path.empty() ? std::string(key) : path + "." + key;
        if (!parent.contains(key)) {
            if (required) fail(p, "missing");
            return;
        }
        const json& v = parent[key];
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) return fail(p, "expected a boolean");
        } else if constexpr (std::is_same_v<T, std::string>) {
            if (!v.is_string()) return fail(p, "expected a string");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) return fail(p, "expected a number");
        } else {
            if (!is_index(v)) return fail(p, "expected a non-negative integer");
        }
        out = v.get<T>();
    }

    std::optional<complex> complex_value(const json& v, const std::string& path) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(path, "expected [re, im]");
            return std::nullopt;
        }
        return complex{v[0].get<double>(), v[1].get<double>()};
    }

    std::vector<std::string> strings(const json& parent, const char* key, const std::string& path) {
        std::vector<std::string> out;
        if (!parent.contains(key)) return out;
        const json& v = parent[key];
        const std::string p = path + "." + key;
        if (!v.is_array()) {
            fail(p, "expected an array of strings");
            return out;
        }
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_string())
                fail(p + "[" + std::to_string(i) + "]", "expected a string");
            else
                out.push_back(v[i].get<std::string>());
        }
        return out;
    }
};

}  // namespace detail

inline nlohmann::json to_json(const ScenarioConfig& c) {
    using nlohmann::json;
    json system = {{"labels", c.labels}, {"times", c.times}};
    system["steps"] = json::array();
    for (const auto& s : c.steps) system["steps"].push_back(detail::step_json(s));
    system["initial_state"] = json::array();
    for (complex z : c.initial_state) system["initial_state"].push_back(detail::complex_json(z));

    json rules = {{"ruleset", c.ruleset},
                  {"include_born", c.include_born},
                  {"epsilon", c.epsilon},
                  {"alpha", c.alpha},
                  {"tau_norm", c.tau_norm},
                  {"born_max_region_size", c.born_max_region_size}};
    rules["pair_family"] = json::array();
    for (const auto& p : c.pair_family)
        rules["pair_family"].push_back({{"times", {p.t1, p.t2}}, {"max_region_size", p.max_region_size}});
    rules["constraints"] = json::array();
    for (const auto& k : c.constraints)
        rules["constraints"].push_back({{"event", k.event}, {"relation", k.relation}, {"rhs", k.rhs}});

    json queries = {{"events", c.events},
                    {"epsilon", c.typicality_epsilon},
                    {"delta", c.delta},
                    {"samples", c.samples},
                    {"seed", c.seed}};
    queries["pairs"] = json::array();
    for (const auto& [a, b] : c.pairs) queries["pairs"].push_back({a, b});
    queries["branches"] = json::array();
    for (const auto& b : c.branches) queries["branches"].push_back({{"name", b.name}, {"ssets", b.ssets}});

    return {{"schema", kConfigSchema}, {"name", c.name}, {"system", system}, {"rules", rules}, {"queries", queries}};
}

inline std::string config_text(const ScenarioConfig& c) { return to_json(c).dump(2) + "\n"; }

// FNV-1a over the canonical (sorted-key, compact) JSON text.
inline std::uint64_t config_hash(const ScenarioConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : to_json(c).dump()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return out;
}

inline Operator step_matrix(const StepSpec& s, std::size_t m) {
    if (s.matrix) return *s.matrix;
    if (s.generator == "identity") return gates::identity(m);
    if (s.generator == "dft") return gates::dft(m);
    if (s.generator == "hadamard") {
        if (m != 2) throw InvalidArgument("scenario-cli", "hadamard generator needs m = 2");
        return gates::hadamard();
    }
    throw InvalidArgument("scenario-cli", "unknown generator '" + s.generator + "'");
}

inline QuantumSystem make_system(const ScenarioConfig& c, std::size_t cap = kDefaultTrajectoryCap) {
    std::vector<Operator> steps;
    for (const auto& s : c.steps) steps.push_back(step_matrix(s, c.labels.size()));
    StateVector psi0(static_cast<Eigen::Index>(c.initial_state.size()));
    for (std::size_t i = 0; i < c.initial_state.size(); ++i) psi0[static_cast<Eigen::Index>(i)] = c.initial_state[i];
    return QuantumSystem(c.labels, c.times, std::move(steps), std::move(psi0), cap);
}

// Semantic checks on an already-decoded config; appends to `problems`.
inline void validate_config(const ScenarioConfig& c, std::vector<std::string>& problems, std::size_t cap) {
    const std::size_t m = c.labels.size();
    auto fail = [&](const std::string& path, const std::string& msg) { problems.push_back(path + ": " + msg); };

    bool system_ok = true;
    if (m == 0) fail("system.labels", "at least one label required"), system_ok = false;
    if (c.times == 0) fail("system.times", "at least one time required"), system_ok = false;
    if (system_ok) {
        try {
            QuantumSystem::check_trajectory_cap(m, c.times, cap);
        } catch (const Error& e) {
            fail("system", e.what());
            system_ok = false;
        }
    }
    // expressions only need the label count and the grid
    const bool space_ok = system_ok;
    if (c.times > 0 && c.steps.size() != c.times - 1) {
        fail("system.steps", "expected " + std::to_string(c.times - 1) + " steps, got " + std::to_string(c.steps.size()));
        system_ok = false;
    }
    for (std::size_t k = 0; k < c.steps.size() && m > 0; ++k) {
        const std::string path = "system.steps[" + std::to_string(k) + "]";
        Operator u;
        try {
            u = step_matrix(c.steps[k], m);
        } catch (const Error& e) {
            fail(path, e.what());
            system_ok = false;
            continue;
        }
        if (static_cast<std::size_t>(u.rows()) != m || static_cast<std::size_t>(u.cols()) != m) {
            fail(path, "matrix is not " + std::to_string(m) + "x" + std::to_string(m));
            system_ok = false;
            continue;
        }
        const double defect = (u * u.adjoint() - gates::identity(m)).cwiseAbs().maxCoeff();
        if (defect > kUnitarityTolerance) {
            fail(path, "step " + std::to_string(k) + " is not unitary (max deviation " + std::to_string(defect) + ")");
            system_ok = false;
        }
    }
    if (c.initial_state.size() != m) {
        fail("system.initial_state", "expected " + std::to_string(m) + " amplitudes");
        system_ok = false;
    } else {
        double norm2 = 0.0;
        for (complex z : c.initial_state) norm2 += std::norm(z);
        if (std::abs(std::sqrt(norm2) - 1.0) > kUnitarityTolerance) {
            fail("system.initial_state", "not normalized (norm " + std::to_string(std::sqrt(norm2)) + ")");
            system_ok = false;
        }
    }

    static const char* rulesets[] = {"none", "born", "qtr", "qtr-min", "qtr-eps", "qtr-alpha"};
    if (std::find(std::begin(rulesets), std::end(rulesets), c.ruleset) == std::end(rulesets))
        fail("rules.ruleset", "unknown ruleset '" + c.ruleset + "'");
    if (!(c.tau_norm >= 0.0)) fail("rules.tau_norm", "must be non-negative");
    if (c.ruleset == "qtr-eps" && !(c.epsilon >= 0.0)) fail("rules.epsilon", "must be non-negative");
    if (c.ruleset == "qtr-alpha" && !(c.alpha > 0.0)) fail("rules.alpha", "must be positive");
    if (!(c.delta > 0.0 && c.delta <= 1.0)) fail("queries.delta", "must lie in (0, 1]");
    if (!(c.typicality_epsilon >= 0.0)) fail("queries.epsilon", "must be non-negative");

    if (!space_ok) return;
    const TrajectorySpace space(m, c.times, cap);
    auto check_expr = [&](const std::string& path, const std::string& text) {
        try {
            (void)parse_event(text, space);
        } catch (const Error& e) {
            fail(path, e.what());
        }
    };
    auto check_sset = [&](const std::string& path, const std::string& text) {
        try {
            (void)parse_sset(text, m, c.times);
        } catch (const Error& e) {
            fail(path, e.what());
        }
    };
    for (std::size_t i = 0; i < c.pair_family.size(); ++i) {
        const auto& p = c.pair_family[i];
        const std::string path = "rules.pair_family[" + std::to_string(i) + "]";
        if (p.t1 >= c.times || p.t2 >= c.times) fail(path + ".times", "time index out of range");
        if (p.max_region_size == 0) fail(path + ".max_region_size", "must be at least 1");
    }
    for (std::size_t i = 0; i < c.constraints.size(); ++i) {
        const std::string path = "rules.constraints[" + std::to_string(i) + "]";
        check_expr(path + ".event", c.constraints[i].event);
        if (c.constraints[i].relation != ">=" && c.constraints[i].relation != "=")
            fail(path + ".relation", "expected \">=\" or \"=\"");
    }
    for (std::size_t i = 0; i < c.events.size(); ++i) check_expr("queries.events[" + std::to_string(i) + "]", c.events[i]);
    for (std::size_t i = 0; i < c.pairs.size(); ++i) {
        check_sset("queries.pairs[" + std::to_string(i) + "][0]", c.pairs[i].first);
        check_sset("queries.pairs[" + std::to_string(i) + "][1]", c.pairs[i].second);
    }
    for (std::size_t i = 0; i < c.branches.size(); ++i) {
        const std::string path = "queries.branches[" + std::to_string(i) + "]";
        if (c.branches[i].ssets.empty()) fail(path + ".ssets", "branch needs at least one s-set");
        for (std::size_t k = 0; k < c.branches[i].ssets.size(); ++k)
            check_sset(path + ".ssets[" + std::to_string(k) + "]", c.branches[i].ssets[k]);
    }
}

inline ScenarioConfig from_json(const nlohmann::json& doc, std::size_t cap = kDefaultTrajectoryCap) {
    using nlohmann::json;
    detail::Reader rd;
    ScenarioConfig c;
    if (!doc.is_object()) throw ConfigError({"<root>: expected a JSON object"});
    rd.only_keys(doc, "", {"schema", "name", "system", "rules", "queries"});
    if (!doc.contains("schema"))
        rd.fail("schema", "missing");
    else if (doc["schema"] != kConfigSchema)
        rd.fail("schema", std::string("expected \"") + kConfigSchema + "\"");
    rd.get(doc, "name", "", c.name);

    if (const json* sys = rd.object(doc, "system", "", true)) {
        rd.only_keys(*sys, "system", {"labels", "times", "steps", "initial_state"});
        c.labels = rd.strings(*sys, "labels", "system");
        if (!sys->contains("labels")) rd.fail("system.labels", "missing");
        rd.get(*sys, "times", "system", c.times, true);
        if (sys->contains("steps")) {
            const json& steps = (*sys)["steps"];
            if (!steps.is_array()) rd.fail("system.steps", "expected an array");
            for (std::size_t k = 0; steps.is_array() && k < steps.size(); ++k) {
                const std::string path = "system.steps[" + std::to_string(k) + "]";
                const json& s = steps[k];
                StepSpec spec;
                if (s.is_string()) {
                    spec.generator = s.get<std::string>();
                } else if (s.is_object()) {
                    rd.only_keys(s, path, {"generator", "matrix"});
                    rd.get(s, "generator", path, spec.generator);
                    if (s.contains("matrix")) {
                        const json& mat = s["matrix"];
                        if (!mat.is_array() || mat.empty()) {
                            rd.fail(path + ".matrix", "expected a non-empty array of rows");
                        } else {
                            const auto rows = static_cast<Eigen::Index>(mat.size());
                            Operator u = Operator::Zero(rows, rows);
                            bool ok = true;
                            for (Eigen::Index i = 0; i < rows && ok; ++i) {
                                const json& row = mat[static_cast<std::size_t>(i)];
                                if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
                                    rd.fail(path + ".matrix[" + std::to_string(i) + "]", "row length must equal row count");
                                    ok = false;
                                    break;
                                }
                                for (Eigen::Index j = 0; j < rows; ++j) {
                                    auto z = rd.complex_value(row[static_cast<std::size_t>(j)],
                                                              path + ".matrix[" + std::to_string(i) + "][" +
                                                                  std::to_string(j) + "]");
                                    if (!z) {
                                        ok = false;
                                        break;
                                    }
                                    u(i, j) = *z;
                                }
                            }
                            if (ok) spec.matrix = u;
                        }
                    } else if (spec.generator.empty()) {
                        rd.fail(path, "needs a generator or a matrix");
                    }
                } else {
                    rd.fail(path, "expected a generator name or {\"matrix\": ...}");
                }
                c.steps.push_back(std::move(spec));
            }
        }
        if (sys->contains("initial_state")) {
            const json& st = (*sys)["initial_state"];
            if (!st.is_array()) rd.fail("system.initial_state", "expected an array of [re, im]");
            for (std::size_t i = 0; st.is_array() && i < st.size(); ++i)
                if (auto z = rd.complex_value(st[i], "system.initial_state[" + std::to_string(i) + "]"))
                    c.initial_state.push_back(*z);
        } else {
            rd.fail("system.initial_state", "missing");
        }
    }

    if (const json* rules = rd.object(doc, "rules", "", false)) {
        rd.only_keys(*rules, "rules", {"ruleset", "include_born", "epsilon", "alpha", "tau_norm",
                                        "born_max_region_size", "pair_family", "constraints"});
        rd.get(*rules, "ruleset", "rules", c.ruleset);
        rd.get(*rules, "include_born", "rules", c.include_born);
        rd.get(*rules, "epsilon", "rules", c.epsilon);
        rd.get(*rules, "alpha", "rules", c.alpha);
        rd.get(*rules, "tau_norm", "rules", c.tau_norm);
        rd.get(*rules, "born_max_region_size", "rules", c.born_max_region_size);
        if (rules->contains("pair_family")) {
            const json& fam = (*rules)["pair_family"];
            if (!fam.is_array()) rd.fail("rules.pair_family", "expected an array");
            for (std::size_t i = 0; fam.is_array() && i < fam.size(); ++i) {
                const std::string path = "rules.pair_family[" + std::to_string(i) + "]";
                const json& e = fam[i];
                if (!e.is_object()) {
                    rd.fail(path, "expected an object");
                    continue;
                }
                rd.only_keys(e, path, {"times", "max_region_size"});
                PairFamilySpec p;
                if (!e.contains("times") || !e["times"].is_array() || e["times"].size() != 2 ||
                    !detail::is_index(e["times"][0]) || !detail::is_index(e["times"][1])) {
                    rd.fail(path + ".times", "expected [t1, t2]");
                } else {
                    p.t1 = e["times"][0].get<std::size_t>();
                    p.t2 = e["times"][1].get<std::size_t>();
                }
                rd.get(e, "max_region_size", path, p.max_region_size);
                c.pair_family.push_back(p);
            }
        }
        if (rules->contains("constraints")) {
            const json& cons = (*rules)["constraints"];
            if (!cons.is_array()) rd.fail("rules.constraints", "expected an array");
            for (std::size_t i = 0; cons.is_array() && i < cons.size(); ++i) {
                const std::string path = "rules.constraints[" + std::to_string(i) + "]";
                if (!cons[i].is_object()) {
                    rd.fail(path, "expected an object");
                    continue;
                }
                rd.only_keys(cons[i], path, {"event", "relation", "rhs"});
                ConstraintSpec k;
                rd.get(cons[i], "event", path, k.event, true);
                rd.get(cons[i], "relation", path, k.relation);
                rd.get(cons[i], "rhs", path, k.rhs, true);
                c.constraints.push_back(k);
            }
        }
    }

    if (const json* q = rd.object(doc, "queries", "", false)) {
        rd.only_keys(*q, "queries", {"events", "pairs", "epsilon", "branches", "delta", "samples", "seed"});
        c.events = rd.strings(*q, "events", "queries");
        rd.get(*q, "epsilon", "queries", c.typicality_epsilon);
        rd.get(*q, "delta", "queries", c.delta);
        rd.get(*q, "samples", "queries", c.samples);
        rd.get(*q, "seed", "queries", c.seed);
        if (q->contains("pairs")) {
            const json& ps = (*q)["pairs"];
            if (!ps.is_array()) rd.fail("queries.pairs", "expected an array");
            for (std::size_t i = 0; ps.is_array() && i < ps.size(); ++i) {
                const json& p = ps[i];
                if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
                    rd.fail("queries.pairs[" + std::to_string(i) + "]", "expected [\"<s-set>\", \"<s-set>\"]");
                else
                    c.pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
            }
        }
        if (q->contains("branches")) {
            const json& bs = (*q)["branches"];
            if (!bs.is_array()) rd.fail("queries.branches", "expected an array");
            for (std::size_t i = 0; bs.is_array() && i < bs.size(); ++i) {
                const std::string path = "queries.branches[" + std::to_string(i) + "]";
                if (!bs[i].is_object()) {
                    rd.fail(path, "expected an object");
                    continue;
                }
                rd.only_keys(bs[i], path, {"name", "ssets"});
                BranchSpec b;
                rd.get(bs[i], "name", path, b.name, true);
                b.ssets = rd.strings(bs[i], "ssets", path);
                c.branches.push_back(std::move(b));
            }
        }
    }

    validate_config(c, rd.problems, cap);
    if (!rd.problems.empty()) throw ConfigError(std::move(rd.problems));
    return c;
}

inline ScenarioConfig parse_config(const std::string& text, std::size_t cap = kDefaultTrajectoryCap) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError({std::string("parse error at byte ") + std::to_string(e.byte) + ": " + e.what()});
    }
    return from_json(doc, cap);
}

inline ScenarioConfig load_config(const std::string& path, std::size_t cap = kDefaultTrajectoryCap) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({path + ": cannot open file"});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), cap);
}

// ---------------------------------------------------------------------------
// Assembly

// Pair family of the scenario; all cross-time pairs with k = 1 when none declared.
inline std::vector<SSetPair> scenario_pairs(const ScenarioConfig& c, const QuantumSystem& sys) {
    std::vector<PairFamilySpec> family = c.pair_family;
    if (family.empty())
        for (std::size_t a = 0; a < c.times; ++a)
            for (std::size_t b = a + 1; b < c.times; ++b) family.push_back({a, b, 1});
    std::vector<SSetPair> pairs;
    for (const auto& f : family)
        for (auto& p : pair_family(sys, f.t1, f.t2, f.max_region_size)) pairs.push_back(std::move(p));
    return pairs;
}

inline ConstraintSet build_constraints(const ScenarioConfig& c, const QuantumSystem& sys,
                                       const TrajectorySpace& space) {
    ConstraintSet cs(space);
    cs.tau_norm = c.tau_norm;
    const bool typicality = c.ruleset.rfind("qtr", 0) == 0;
    if (c.ruleset == "born" || (typicality && c.include_born)) {
        const auto family = born_family(sys, c.born_max_region_size);
        cs.append(born_constraints(sys, space, family));
    }
    if (typicality) {
        QtrVariant v = QtrVariant::standard();
        if (c.ruleset == "qtr-min") v = QtrVariant::min();
        if (c.ruleset == "qtr-eps") v = QtrVariant::eps(c.epsilon);
        if (c.ruleset == "qtr-alpha") v = QtrVariant::alpha(c.alpha);
        const auto pairs = scenario_pairs(c, sys);
        cs.append(qtr_variant_constraints(sys, space, pairs, v, c.tau_norm));
    }
    if (!c.constraints.empty()) {
        ConstraintSet extra(space);
        extra.family = "custom";
        for (const auto& k : c.constraints)
            extra.add(custom_constraint(space, k.event, k.rhs,
                                        k.relation == "=" ? lp::Relation::Equal : lp::Relation::GreaterEq));
        cs.append(extra);
    }
    if (cs.family.empty()) cs.family = c.ruleset;
    return cs;
}

inline Branch scenario_branch(const ScenarioConfig& c, const QuantumSystem& sys, const BranchSpec& spec) {
    std::vector<SSet> ssets;
    for (const auto& text : spec.ssets) ssets.push_back(parse_sset(text, sys.num_labels(), sys.num_times()));
    return make_branch(sys, std::move(ssets), c.tau_norm, spec.name);
}

// ---------------------------------------------------------------------------
// Built-in scenarios

namespace detail {

inline std::vector<complex> basis_state(std::size_t m, std::size_t k) {
    std::vector<complex> v(m, complex{0.0, 0.0});
    v[k] = complex{1.0, 0.0};
    return v;
}

inline StepSpec explicit_step(const Operator& u) { return StepSpec{"", u}; }

}  // namespace detail

// Source, beam splitter, two slits: Hadamard then free flight.
inline ScenarioConfig build_beam_splitter() {
    ScenarioConfig c;
    c.name = "beam-splitter";
    c.labels = {"reflected", "transmitted"};
    c.times = 3;
    c.steps = {{"hadamard", {}}, {"identity", {}}};
    c.initial_state = detail::basis_state(2, 0);
    c.ruleset = "qtr";
    c.pair_family = {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}};
    c.events = {"(t=1,{0}) & (t=2,{0})", "(t=1,{0}) & (t=2,{1})", "(t=1,{0})"};
    c.pairs = {{"(t=1,{0})", "(t=2,{0})"}, {"(t=1,{1})", "(t=2,{1})"}, {"(t=1,{0})", "(t=2,{1})"}};
    c.typicality_epsilon = 1e-9;
    c.branches = {{"reflected", {"(t=1,{0})", "(t=2,{0})"}}, {"transmitted", {"(t=1,{1})", "(t=2,{1})"}}};
    c.samples = 20;
    return c;
}

// Two Hadamards: interference recombines both arms into label 0.
inline ScenarioConfig build_mach_zehnder() {
    ScenarioConfig c;
    c.name = "mach-zehnder";
    c.labels = {"upper", "lower"};
    c.times = 3;
    c.steps = {{"hadamard", {}}, {"hadamard", {}}};
    c.initial_state = detail::basis_state(2, 0);
    c.ruleset = "qtr";
    c.pair_family = {{1, 2, 1}};
    c.events = {"(t=1,{0}) & (t=2,{0})", "(t=1,{1}) & (t=2,{0})"};
    c.pairs = {{"(t=1,{0})", "(t=2,{0})"}, {"(t=1,{1})", "(t=2,{0})"}};
    c.typicality_epsilon = 0.1;
    c.branches = {{"upper", {"(t=1,{0})", "(t=2,{0})"}}};
    c.samples = 20;
    return c;
}

// A single packet whose phase structure changes between the two times, so
// the typicality constraints are vacuous and the cross-time joint is loose.
inline ScenarioConfig build_spreading_packet() {
    ScenarioConfig c;
    c.name = "spreading-packet";
    c.labels = {"left", "right"};
    c.times = 2;
    c.steps = {{"dft", {}}};
    const double r = 1.0 / std::sqrt(2.0);
    c.initial_state = {complex{r, 0.0}, complex{0.0, r}};
    c.ruleset = "qtr";
    c.pair_family = {{0, 1, 1}};
    c.events = {"(t=0,{0}) & (t=1,{0})"};
    c.pairs = {{"(t=0,{0})", "(t=1,{0})"}};
    c.typicality_epsilon = 0.1;
    c.samples = 20;
    return c;
}

// A packet leaking slowly into its neighbour: a branch whose largest relative
// distance over four times is 1e-6.
inline ScenarioConfig build_leaky_branch() {
    ScenarioConfig c;
    c.name = "leaky-branch";
    c.labels = {"inside", "outside"};
    c.times = 4;
    // 2 sin^2(3 theta) = 1e-6 at the last time.
    const double theta = std::asin(std::sqrt(5e-7)) / 3.0;
    const Operator step = gates::rotation(2, 0, 1, theta);
    c.steps = {detail::explicit_step(step), detail::explicit_step(step), detail::explicit_step(step)};
    const double r = 1.0 / std::sqrt(2.0);
    c.initial_state = {complex{r, 0.0}, complex{0.0, r}};
    c.ruleset = "qtr";
    c.pair_family = {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}};
    c.events = {"(t=0,{0}) & (t=3,{0})"};
    c.pairs = {{"(t=0,{0})", "(t=3,{0})"}};
    c.typicality_epsilon = 1e-6;
    c.branches = {{"inside", {"(t=0,{0})", "(t=1,{0})", "(t=2,{0})", "(t=3,{0})"}},
                  {"outside", {"(t=0,{1})", "(t=1,{1})", "(t=2,{1})", "(t=3,{1})"}}};
    c.delta = 1e-3;
    c.samples = 20;
    return c;
}

// Contradictory lower bounds P(A) >= 0.8 and P(!A) >= 0.8.
inline ScenarioConfig build_adversarial() {
    ScenarioConfig c;
    c.name = "adversarial";
    c.labels = {"a", "b"};
    c.times = 1;
    const double r = 1.0 / std::sqrt(2.0);
    c.initial_state = {complex{r, 0.0}, complex{r, 0.0}};
    c.ruleset = "none";
    c.constraints = {{"(t=0,{0})", ">=", 0.8}, {"!(t=0,{0})", ">=", 0.8}};
    c.events = {"(t=0,{0})"};
    return c;
}

inline std::vector<std::string> builtin_scenario_names() {
    return {"beam-splitter", "mach-zehnder", "spreading-packet", "leaky-branch", "adversarial"};
}

inline ScenarioConfig builtin_scenario(const std::string& name) {
    if (name == "beam-splitter") return build_beam_splitter();
    if (name == "mach-zehnder") return build_mach_zehnder();
    if (name == "spreading-packet") return build_spreading_packet();
    if (name == "leaky-branch") return build_leaky_branch();
    if (name == "adversarial") return build_adversarial();
    throw InvalidArgument("scenario-cli", "unknown scenario '" + name + "'");
}

}  // namespace iqp
