#include "stochrobust/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

namespace stochrobust {

namespace {

std::string num(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

}  // namespace

// --- ParamTable -----------------------------------------------------------

std::optional<uint32_t> ParamTable::index(std::string_view name) const {
    for (uint32_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return i;
    return std::nullopt;
}

double ParamTable::get(std::string_view name) const {
    auto i = index(name);
    if (!i) throw ModelError("unknown parameter '" + std::string(name) + "'");
    return values[*i];
}

void ParamTable::set(std::string_view name, double v) {
    auto i = index(name);
    if (!i) throw ModelError("unknown parameter '" + std::string(name) + "'");
    values[*i] = v;
}

void ParamTable::add(std::string name, double v) {
    if (index(name)) throw ModelError("duplicate parameter '" + name + "'");
    names.push_back(std::move(name));
    values.push_back(v);
}

// --- ReactionNetwork --------------------------------------------------------

std::optional<uint32_t> ReactionNetwork::species_index(std::string_view name) const {
    for (uint32_t i = 0; i < species.size(); ++i)
        if (species[i].name == name) return i;
    return std::nullopt;
}

std::vector<double> ReactionNetwork::initial_state() const {
    std::vector<double> s(species.size());
    for (size_t i = 0; i < species.size(); ++i) s[i] = species[i].initial;
    return s;
}

std::vector<std::string> ReactionNetwork::variable_names() const {
    std::vector<std::string> out;
    out.reserve(species.size());
    for (const auto& sp : species) out.push_back(sp.name);
    return out;
}

void ReactionNetwork::finalize() {
    std::set<std::string> seen;
    for (const auto& sp : species) {
        if (!seen.insert(sp.name).second)
            throw ModelError("duplicate species '" + sp.name + "'");
        if (params.contains(sp.name))
            throw ModelError("name '" + sp.name + "' declared as both species and parameter");
        if (sp.initial < 0)
            throw ModelError("negative initial count for species '" + sp.name + "'");
        if (sp.initial != std::floor(sp.initial))
            throw ModelError("non-integer initial count for species '" + sp.name + "'");
    }
    NameResolver resolver = [this](const std::string& n, Slot& out) {
        if (auto i = species_index(n)) { out = {Slot::Kind::state, *i}; return true; }
        if (auto i = params.index(n)) { out = {Slot::Kind::param, *i}; return true; }
        return false;
    };
    for (auto& r : reactions) {
        std::map<uint32_t, double> net;
        for (auto [i, k] : r.products) net[i] += k;
        for (auto [i, k] : r.reactants) net[i] -= k;
        r.update.clear();
        for (auto [i, d] : net) {
            if (species[i].constant || d == 0) continue;
            r.update.emplace_back(i, d);
        }
        r.compiled_rate = compile_expr(r.rate, resolver);
    }
}

namespace {

double falling_binom(double x, uint32_t r) {
    // binom(x, r) for integer-valued x >= 0
    double acc = 1.0;
    for (uint32_t k = 0; k < r; ++k) acc *= (x - k) / static_cast<double>(k + 1);
    return acc;
}

}  // namespace

double ReactionNetwork::propensity(size_t j, std::span<const double> state) const {
    const Reaction& r = reactions[j];
    for (auto [i, k] : r.reactants)
        if (state[i] < k) return 0.0;
    EvalContext ctx{state, {}, params.values};
    double a;
    if (r.law == RateLawKind::mass_action) {
        a = r.compiled_rate.eval(ctx);
        for (auto [i, k] : r.reactants) a *= falling_binom(state[i], k);
    } else {
        a = r.compiled_rate.eval(ctx);
    }
    if (!(a >= 0.0) || !std::isfinite(a))
        throw EvaluationError("rate of reaction '" + r.name + "' evaluated to " + num(a));
    return a;
}

std::vector<double> ReactionNetwork::fluid_vector_field(std::span<const double> state) const {
    if (state.size() != species.size())
        throw EvaluationError("state dimension does not match species count");
    std::vector<double> field(species.size(), 0.0);
    EvalContext ctx{state, {}, params.values};
    for (const Reaction& r : reactions) {
        double f;
        if (r.law == RateLawKind::mass_action) {
            f = r.compiled_rate.eval(ctx);
            for (auto [i, k] : r.reactants) f *= std::pow(state[i], k);
        } else {
            f = r.compiled_rate.eval(ctx);
        }
        if (!std::isfinite(f))
            throw EvaluationError("rate of reaction '" + r.name + "' evaluated to " + num(f));
        for (auto [i, d] : r.update) field[i] += d * f;
    }
    return field;
}

// --- HybridModel -------------------------------------------------------------

std::optional<uint32_t> DiscreteVar::label_index(std::string_view label) const {
    for (uint32_t i = 0; i < domain.size(); ++i)
        if (domain[i] == label) return i;
    return std::nullopt;
}

std::optional<uint32_t> HybridModel::continuous_index(std::string_view name) const {
    for (uint32_t i = 0; i < continuous.size(); ++i)
        if (continuous[i].name == name) return i;
    return std::nullopt;
}

std::optional<uint32_t> HybridModel::discrete_index(std::string_view name) const {
    for (uint32_t i = 0; i < discrete.size(); ++i)
        if (discrete[i].name == name) return i;
    return std::nullopt;
}

std::vector<double> HybridModel::initial_continuous() const {
    std::vector<double> x(continuous.size());
    for (size_t i = 0; i < continuous.size(); ++i) x[i] = continuous[i].initial;
    return x;
}

std::vector<double> HybridModel::initial_discrete() const {
    std::vector<double> g(discrete.size());
    for (size_t i = 0; i < discrete.size(); ++i) g[i] = discrete[i].initial;
    return g;
}

std::vector<std::string> HybridModel::variable_names() const {
    std::vector<std::string> out;
    out.reserve(continuous.size());
    for (const auto& v : continuous) out.push_back(v.name);
    return out;
}

void HybridModel::finalize() {
    std::set<std::string> seen;
    auto unique_name = [&](const std::string& n, const char* what) {
        if (!seen.insert(n).second)
            throw ModelError(std::string("duplicate ") + what + " name '" + n + "'");
    };
    for (const auto& v : continuous) unique_name(v.name, "variable");
    for (const auto& v : discrete) {
        unique_name(v.name, "variable");
        if (v.domain.empty())
            throw ModelError("discrete variable '" + v.name + "' has empty domain");
        if (v.initial >= v.domain.size())
            throw ModelError("initial value of '" + v.name + "' outside its domain");
    }
    for (const auto& n : params.names) unique_name(n, "parameter");
    for (const auto& dv : discrete)
        for (const auto& lab : dv.domain)
            if (seen.count(lab))
                throw ModelError("domain label '" + lab + "' collides with a declared name");

    NameResolver resolver = [this](const std::string& n, Slot& out) {
        if (auto i = continuous_index(n)) { out = {Slot::Kind::state, *i}; return true; }
        if (auto i = discrete_index(n)) { out = {Slot::Kind::aux, *i}; return true; }
        if (auto i = params.index(n)) { out = {Slot::Kind::param, *i}; return true; }
        return false;
    };
    LabelResolver labels = [this](uint32_t aux, const std::string& lab, uint32_t& out) {
        auto i = discrete[aux].label_index(lab);
        if (!i) return false;
        out = *i;
        return true;
    };

    std::vector<bool> has_flow(continuous.size(), false);
    for (auto& f : flows) {
        if (f.var >= continuous.size()) throw ModelError("flow references unknown variable");
        if (has_flow[f.var])
            throw ModelError("duplicate flow for '" + continuous[f.var].name + "'");
        has_flow[f.var] = true;
        f.compiled = compile_expr(f.rhs, resolver, labels);
    }
    for (size_t i = 0; i < continuous.size(); ++i)
        if (!has_flow[i]) {
            // variables without a declared flow are constant
            Flow f;
            f.var = static_cast<uint32_t>(i);
            f.rhs = ExprNode::constant(0.0);
            f.compiled = compile_expr(f.rhs, resolver, labels);
            flows.push_back(std::move(f));
        }
    std::sort(flows.begin(), flows.end(), [](const Flow& a, const Flow& b) { return a.var < b.var; });

    for (auto& j : jumps) {
        j.compiled_guard = compile_expr(j.guard, resolver, labels);
        j.compiled_rate = compile_expr(j.rate, resolver, labels);
        for (auto [d, l] : j.resets) {
            if (d >= discrete.size()) throw ModelError("reset references unknown discrete variable");
            if (l >= discrete[d].domain.size())
                throw ModelError("reset label outside the domain of '" + discrete[d].name + "'");
        }
    }
}

void HybridModel::eval_flows(std::span<const double> x, std::span<const double> g,
                             std::span<double> out) const {
    EvalContext ctx{x, g, params.values};
    for (const Flow& f : flows) out[f.var] = f.compiled.eval(ctx);
}

double HybridModel::hazard(size_t k, std::span<const double> x, std::span<const double> g) const {
    const Jump& j = jumps[k];
    EvalContext ctx{x, g, params.values};
    if (j.compiled_guard.eval(ctx) == 0.0) return 0.0;
    double h = j.compiled_rate.eval(ctx);
    if (!(h >= 0.0) || !std::isfinite(h))
        throw EvaluationError("hazard of jump '" + j.name + "' evaluated to " + num(h));
    return h;
}

// --- text grammar parser ------------------------------------------------------

namespace {

double parse_signed_number(TokenStream& ts) {
    bool negate = ts.accept("-");
    double v = ts.expect_number();
    return negate ? -v : v;
}

struct ModelBuilder {
    ReactionNetwork net;
    HybridModel hyb;
    bool has_network_stmt = false;
    bool has_hybrid_stmt = false;

    std::map<std::string, uint32_t> species_idx;   // CTMC
    std::map<std::string, uint32_t> cont_idx;      // hybrid
    std::map<std::string, uint32_t> disc_idx;

    void species_stmt(TokenStream& ts, bool constant) {
        has_network_stmt = true;
        std::string name = ts.expect_ident();
        ts.expect("=");
        double v = parse_signed_number(ts);
        ts.expect(";");
        if (species_idx.count(name)) throw ModelError("duplicate species '" + name + "'");
        species_idx[name] = static_cast<uint32_t>(net.species.size());
        net.species.push_back({name, v, constant});
    }

    void param_stmt(TokenStream& ts) {
        std::string name = ts.expect_ident();
        ts.expect("=");
        double v = parse_signed_number(ts);
        ts.expect(";");
        net.params.add(name, v);
        hyb.params.add(std::move(name), v);
    }

    uint32_t species_ref(TokenStream& ts) {
        const Token& t = ts.peek();
        std::string name = ts.expect_ident();
        auto it = species_idx.find(name);
        if (it == species_idx.end())
            throw ParseError("undeclared species '" + name + "'", t.line, t.col);
        return it->second;
    }

    void side(TokenStream& ts, std::vector<std::pair<uint32_t, uint32_t>>& out,
              std::string_view terminator) {
        if (ts.peek().is(terminator)) return;  // empty side
        while (true) {
            uint32_t coeff = 1;
            if (ts.peek().kind == TokKind::number) {
                double c = ts.expect_number();
                if (c != std::floor(c) || c < 1)
                    throw ParseError("stoichiometric coefficient must be a positive integer");
                coeff = static_cast<uint32_t>(c);
            }
            out.emplace_back(species_ref(ts), coeff);
            if (!ts.accept("+")) break;
        }
    }

    void reaction_stmt(TokenStream& ts) {
        has_network_stmt = true;
        Reaction r;
        r.name = ts.expect_ident();
        ts.expect(":");
        side(ts, r.reactants, "->");
        ts.expect("->");
        side(ts, r.products, "@");
        ts.expect("@");
        std::string law = ts.expect_ident();
        ts.expect("(");
        r.rate = parse_expression(ts);
        ts.expect(")");
        ts.expect(";");
        if (law == "mass_action") r.law = RateLawKind::mass_action;
        else if (law == "expr") r.law = RateLawKind::expression;
        else throw ParseError("unknown rate law '" + law + "' (expected mass_action or expr)");
        net.reactions.push_back(std::move(r));
    }

    void discrete_stmt(TokenStream& ts) {
        has_hybrid_stmt = true;
        DiscreteVar d;
        d.name = ts.expect_ident();
        if (!ts.next().is_ident("in")) throw ParseError("expected 'in' after discrete name");
        ts.expect("{");
        d.domain.push_back(ts.expect_ident());
        while (ts.accept(",")) d.domain.push_back(ts.expect_ident());
        ts.expect("}");
        if (ts.accept("=")) {
            std::string lab = ts.expect_ident();
            auto i = d.label_index(lab);
            if (!i) throw ModelError("initial label '" + lab + "' not in domain of '" + d.name + "'");
            d.initial = *i;
        }
        ts.expect(";");
        if (disc_idx.count(d.name)) throw ModelError("duplicate discrete variable '" + d.name + "'");
        disc_idx[d.name] = static_cast<uint32_t>(hyb.discrete.size());
        hyb.discrete.push_back(std::move(d));
    }

    void continuous_stmt(TokenStream& ts) {
        has_hybrid_stmt = true;
        ContinuousVar v;
        v.name = ts.expect_ident();
        ts.expect("=");
        v.initial = parse_signed_number(ts);
        ts.expect(";");
        if (cont_idx.count(v.name)) throw ModelError("duplicate continuous variable '" + v.name + "'");
        cont_idx[v.name] = static_cast<uint32_t>(hyb.continuous.size());
        hyb.continuous.push_back(std::move(v));
    }

    void flow_stmt(TokenStream& ts) {
        has_hybrid_stmt = true;
        Flow f;
        const Token& t = ts.peek();
        std::string name = ts.expect_ident();
        auto it = cont_idx.find(name);
        if (it == cont_idx.end())
            throw ParseError("flow for undeclared continuous variable '" + name + "'", t.line, t.col);
        f.var = it->second;
        ts.expect("=");
        f.rhs = parse_expression(ts);
        ts.expect(";");
        hyb.flows.push_back(std::move(f));
    }

    void jump_stmt(TokenStream& ts) {
        has_hybrid_stmt = true;
        Jump j;
        j.name = ts.expect_ident();
        ts.expect(":");
        if (!ts.next().is_ident("when")) throw ParseError("expected 'when' in jump");
        j.guard = parse_expression(ts);
        if (!ts.next().is_ident("rate")) throw ParseError("expected 'rate' in jump");
        j.rate = parse_expression(ts);
        if (!ts.next().is_ident("set")) throw ParseError("expected 'set' in jump");
        while (true) {
            const Token& t = ts.peek();
            std::string dname = ts.expect_ident();
            auto it = disc_idx.find(dname);
            if (it == disc_idx.end())
                throw ParseError("reset of undeclared discrete variable '" + dname + "'", t.line, t.col);
            ts.expect("=");
            std::string lab = ts.expect_ident();
            auto li = hyb.discrete[it->second].label_index(lab);
            if (!li)
                throw ModelError("label '" + lab + "' not in domain of '" + dname + "'");
            j.resets.emplace_back(it->second, *li);
            if (!ts.accept(",")) break;
        }
        ts.expect(";");
        hyb.jumps.push_back(std::move(j));
    }

    Model finish() {
        if (has_network_stmt && has_hybrid_stmt)
            throw ModelError("model mixes reaction-network and hybrid statements");
        if (has_hybrid_stmt) {
            hyb.finalize();
            return hyb;
        }
        net.finalize();
        return net;
    }
};

}  // namespace

Model parse_model(std::string_view text) {
    size_t i = text.find_first_not_of(" \t\r\n");
    if (i != std::string_view::npos && text[i] == '{') return model_from_json(text);

    TokenStream ts(tokenize(text));
    ModelBuilder b;
    while (!ts.at_end()) {
        const Token& t = ts.peek();
        if (t.kind != TokKind::ident) ts.fail("expected a declaration keyword");
        std::string kw = ts.next().text;
        if (kw == "species") b.species_stmt(ts, false);
        else if (kw == "const") b.species_stmt(ts, true);
        else if (kw == "param") b.param_stmt(ts);
        else if (kw == "reaction") b.reaction_stmt(ts);
        else if (kw == "discrete") b.discrete_stmt(ts);
        else if (kw == "continuous") b.continuous_stmt(ts);
        else if (kw == "flow") b.flow_stmt(ts);
        else if (kw == "jump") b.jump_stmt(ts);
        else throw ParseError("unknown declaration '" + kw + "'", t.line, t.col);
    }
    return b.finish();
}

// --- rendering -----------------------------------------------------------------

namespace {

void render_network(const ReactionNetwork& m, std::string& out) {
    for (const auto& sp : m.species) {
        out += sp.constant ? "const " : "species ";
        out += sp.name + " = " + num(sp.initial) + ";\n";
    }
    for (size_t i = 0; i < m.params.names.size(); ++i)
        out += "param " + m.params.names[i] + " = " + num(m.params.values[i]) + ";\n";
    for (const auto& r : m.reactions) {
        out += "reaction " + r.name + ": ";
        auto side = [&](const std::vector<std::pair<uint32_t, uint32_t>>& v) {
            for (size_t i = 0; i < v.size(); ++i) {
                if (i) out += " + ";
                if (v[i].second != 1) out += std::to_string(v[i].second) + " ";
                out += m.species[v[i].first].name;
            }
        };
        side(r.reactants);
        out += r.reactants.empty() ? "-> " : " -> ";
        side(r.products);
        out += r.products.empty() ? "" : " ";
        out += "@ ";
        out += r.law == RateLawKind::mass_action ? "mass_action(" : "expr(";
        out += render_expr(r.rate) + ");\n";
    }
}

void render_hybrid(const HybridModel& m, std::string& out) {
    for (const auto& d : m.discrete) {
        out += "discrete " + d.name + " in {";
        for (size_t i = 0; i < d.domain.size(); ++i) {
            if (i) out += ",";
            out += d.domain[i];
        }
        out += "} = " + d.domain[d.initial] + ";\n";
    }
    for (const auto& c : m.continuous)
        out += "continuous " + c.name + " = " + num(c.initial) + ";\n";
    for (size_t i = 0; i < m.params.names.size(); ++i)
        out += "param " + m.params.names[i] + " = " + num(m.params.values[i]) + ";\n";
    for (const auto& f : m.flows)
        out += "flow " + m.continuous[f.var].name + " = " + render_expr(f.rhs) + ";\n";
    for (const auto& j : m.jumps) {
        out += "jump " + j.name + ": when " + render_expr(j.guard) + " rate " +
               render_expr(j.rate) + " set ";
        for (size_t i = 0; i < j.resets.size(); ++i) {
            if (i) out += ", ";
            out += m.discrete[j.resets[i].first].name + "=" +
                   m.discrete[j.resets[i].first].domain[j.resets[i].second];
        }
        out += ";\n";
    }
}

}  // namespace

std::string render_model(const Model& m) {
    std::string out;
    if (const auto* net = std::get_if<ReactionNetwork>(&m)) render_network(*net, out);
    else render_hybrid(std::get<HybridModel>(m), out);
    return out;
}

bool structurally_equal(const Model& a, const Model& b) {
    return render_model(a) == render_model(b);
}

std::string model_hash(const Model& m) {
    std::string text = render_model(m);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// --- JSON mirror ------------------------------------------------------------------

namespace {

using nlohmann::json;

json params_to_json(const ParamTable& p) {
    json j = json::object();
    for (size_t i = 0; i < p.names.size(); ++i) j[p.names[i]] = p.values[i];
    return j;
}

void params_from_json(const json& j, ParamTable& p) {
    for (auto it = j.begin(); it != j.end(); ++it) p.add(it.key(), it.value().get<double>());
}

json network_to_json(const ReactionNetwork& m) {
    json j;
    j["type"] = "reaction_network";
    j["species"] = json::array();
    for (const auto& sp : m.species)
        j["species"].push_back({{"name", sp.name}, {"initial", sp.initial}, {"constant", sp.constant}});
    j["parameters"] = params_to_json(m.params);
    j["reactions"] = json::array();
    for (const auto& r : m.reactions) {
        json jr;
        jr["name"] = r.name;
        json reac = json::object(), prod = json::object();
        for (auto [i, k] : r.reactants) reac[m.species[i].name] = k;
        for (auto [i, k] : r.products) prod[m.species[i].name] = k;
        jr["reactants"] = reac;
        jr["products"] = prod;
        jr["rate"] = {{r.law == RateLawKind::mass_action ? "mass_action" : "expr",
                       render_expr(r.rate)}};
        j["reactions"].push_back(jr);
    }
    return j;
}

json hybrid_to_json(const HybridModel& m) {
    json j;
    j["type"] = "hybrid";
    j["discrete"] = json::array();
    for (const auto& d : m.discrete)
        j["discrete"].push_back(
            {{"name", d.name}, {"domain", d.domain}, {"initial", d.domain[d.initial]}});
    j["continuous"] = json::array();
    for (const auto& c : m.continuous)
        j["continuous"].push_back({{"name", c.name}, {"initial", c.initial}});
    j["parameters"] = params_to_json(m.params);
    j["flows"] = json::object();
    for (const auto& f : m.flows) j["flows"][m.continuous[f.var].name] = render_expr(f.rhs);
    j["jumps"] = json::array();
    for (const auto& jm : m.jumps) {
        json r = json::object();
        for (auto [d, l] : jm.resets) r[m.discrete[d].name] = m.discrete[d].domain[l];
        j["jumps"].push_back({{"name", jm.name},
                              {"guard", render_expr(jm.guard)},
                              {"rate", render_expr(jm.rate)},
                              {"set", r}});
    }
    return j;
}

}  // namespace

std::string model_to_json(const Model& m) {
    json j = std::holds_alternative<ReactionNetwork>(m)
                 ? network_to_json(std::get<ReactionNetwork>(m))
                 : hybrid_to_json(std::get<HybridModel>(m));
    return j.dump(2);
}

Model model_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid model JSON: ") + e.what());
    }
    std::string type = j.value("type", "");
    if (type == "reaction_network") {
        ReactionNetwork m;
        std::map<std::string, uint32_t> sidx;
        for (const auto& sp : j.at("species")) {
            sidx[sp.at("name")] = static_cast<uint32_t>(m.species.size());
            m.species.push_back({sp.at("name"), sp.at("initial"), sp.value("constant", false)});
        }
        if (j.contains("parameters")) params_from_json(j["parameters"], m.params);
        auto ref = [&](const std::string& n) -> uint32_t {
            auto it = sidx.find(n);
            if (it == sidx.end()) throw ModelError("undeclared species '" + n + "'");
            return it->second;
        };
        for (const auto& jr : j.value("reactions", json::array())) {
            Reaction r;
            r.name = jr.at("name");
            for (auto it = jr.at("reactants").begin(); it != jr.at("reactants").end(); ++it)
                r.reactants.emplace_back(ref(it.key()), it.value().get<uint32_t>());
            for (auto it = jr.at("products").begin(); it != jr.at("products").end(); ++it)
                r.products.emplace_back(ref(it.key()), it.value().get<uint32_t>());
            const json& rate = jr.at("rate");
            if (rate.contains("mass_action")) {
                r.law = RateLawKind::mass_action;
                r.rate = parse_expression(rate["mass_action"].get<std::string>());
            } else {
                r.law = RateLawKind::expression;
                r.rate = parse_expression(rate.at("expr").get<std::string>());
            }
            m.reactions.push_back(std::move(r));
        }
        m.finalize();
        return m;
    }
    if (type == "hybrid") {
        HybridModel m;
        for (const auto& jd : j.value("discrete", json::array())) {
            DiscreteVar d;
            d.name = jd.at("name");
            d.domain = jd.at("domain").get<std::vector<std::string>>();
            std::string init = jd.value("initial", d.domain.empty() ? "" : d.domain[0]);
            auto li = d.label_index(init);
            if (!li) throw ModelError("initial label '" + init + "' not in domain of '" + d.name + "'");
            d.initial = *li;
            m.discrete.push_back(std::move(d));
        }
        for (const auto& jc : j.value("continuous", json::array()))
            m.continuous.push_back({jc.at("name"), jc.at("initial")});
        if (j.contains("parameters")) params_from_json(j["parameters"], m.params);
        for (auto it = j.value("flows", json::object()).begin();
             it != j.value("flows", json::object()).end(); ++it) {
            Flow f;
            auto ci = m.continuous_index(it.key());
            if (!ci) throw ModelError("flow for undeclared continuous variable '" + it.key() + "'");
            f.var = *ci;
            f.rhs = parse_expression(it.value().get<std::string>());
            m.flows.push_back(std::move(f));
        }
        for (const auto& jj : j.value("jumps", json::array())) {
            Jump jm;
            jm.name = jj.at("name");
            jm.guard = parse_expression(jj.at("guard").get<std::string>());
            jm.rate = parse_expression(jj.at("rate").get<std::string>());
            for (auto it = jj.at("set").begin(); it != jj.at("set").end(); ++it) {
                auto di = m.discrete_index(it.key());
                if (!di) throw ModelError("reset of undeclared discrete variable '" + it.key() + "'");
                auto li = m.discrete[*di].label_index(it.value().get<std::string>());
                if (!li) throw ModelError("label '" + it.value().get<std::string>() +
                                          "' not in domain of '" + it.key() + "'");
                jm.resets.emplace_back(*di, *li);
            }
            m.jumps.push_back(std::move(jm));
        }
        m.finalize();
        return m;
    }
    throw ModelError("model JSON must declare type 'reaction_network' or 'hybrid'");
}

// --- shared parameter access ---------------------------------------------------------

namespace {

ParamTable& table_of(Model& m) {
    if (auto* net = std::get_if<ReactionNetwork>(&m)) return net->params;
    return std::get<HybridModel>(m).params;
}

const ParamTable& table_of(const Model& m) {
    if (const auto* net = std::get_if<ReactionNetwork>(&m)) return net->params;
    return std::get<HybridModel>(m).params;
}

}  // namespace

bool has_parameter(const Model& m, std::string_view name) { return table_of(m).contains(name); }
double get_parameter(const Model& m, std::string_view name) { return table_of(m).get(name); }
void set_parameter(Model& m, std::string_view name, double value) { table_of(m).set(name, value); }

std::vector<std::string> variable_names(const Model& m) {
    if (const auto* net = std::get_if<ReactionNetwork>(&m)) return net->variable_names();
    return std::get<HybridModel>(m).variable_names();
}

// --- builtins ------------------------------------------------------------------------

ReactionNetwork builtin_schlogl(const std::map<std::string, double>& overrides) {
    static const std::set<std::string> allowed = {"k1", "k2", "k3", "k4", "c3", "X0", "A0", "B0"};
    for (const auto& [k, v] : overrides)
        if (!allowed.count(k)) throw ModelError("unknown Schlogl override '" + k + "'");
    auto ov = [&](const char* k, double dflt) {
        auto it = overrides.find(k);
        return it == overrides.end() ? dflt : it->second;
    };
    double X0 = ov("X0", 247), A0 = ov("A0", 1e5), B0 = ov("B0", 2e5);
    double k1 = ov("k1", 3e-7), k2 = ov("k2", 1e-4), k4 = ov("k4", 3.5);
    double k3 = ov("k3", 1e-3);
    double c3 = k3 * B0;
    if (auto it = overrides.find("c3"); it != overrides.end()) {
        c3 = it->second;
        k3 = B0 > 0 ? c3 / B0 : k3;
    }
    std::string text =
        "species X = " + num(X0) + ";\n"
        "const A = " + num(A0) + ";\n"
        "const B = " + num(B0) + ";\n"
        "param k1 = " + num(k1) + ";\n"
        "param k2 = " + num(k2) + ";\n"
        "param k3 = " + num(k3) + ";\n"
        "param k4 = " + num(k4) + ";\n"
        "param c3 = " + num(c3) + ";\n"
        "reaction r1: A + 2 X -> 3 X @ mass_action(k1);\n"
        "reaction r2: 3 X -> A + 2 X @ mass_action(k2);\n"
        "reaction r3: B -> X @ expr(c3);\n"
        "reaction r4: X -> B @ mass_action(k4);\n";
    return std::get<ReactionNetwork>(parse_model(text));
}

HybridModel builtin_repressilator(const std::map<std::string, double>& overrides) {
    static const std::set<std::string> allowed = {"kp", "kd", "kb", "ku", "X1_0", "X2_0", "X3_0"};
    for (const auto& [k, v] : overrides)
        if (!allowed.count(k)) throw ModelError("unknown repressilator override '" + k + "'");
    auto ov = [&](const char* k, double dflt) {
        auto it = overrides.find(k);
        return it == overrides.end() ? dflt : it->second;
    };
    std::string text =
        "discrete g1 in {free,bound} = free;\n"
        "discrete g2 in {free,bound} = free;\n"
        "discrete g3 in {free,bound} = free;\n"
        "continuous X1 = " + num(ov("X1_0", 0.0)) + ";\n"
        "continuous X2 = " + num(ov("X2_0", 0.0)) + ";\n"
        "continuous X3 = " + num(ov("X3_0", 0.0)) + ";\n"
        "param kp = " + num(ov("kp", 1.0)) + ";\n"
        "param kd = " + num(ov("kd", 0.01)) + ";\n"
        "param kb = " + num(ov("kb", 0.1)) + ";\n"
        "param ku = " + num(ov("ku", 0.001)) + ";\n"
        "flow X1 = kp*ind(g1==free) - kd*X1;\n"
        "flow X2 = kp*ind(g2==free) - kd*X2;\n"
        "flow X3 = kp*ind(g3==free) - kd*X3;\n"
        "jump bind1: when g1==free rate kb*X3 set g1=bound;\n"
        "jump unbind1: when g1==bound rate ku set g1=free;\n"
        "jump bind2: when g2==free rate kb*X1 set g2=bound;\n"
        "jump unbind2: when g2==bound rate ku set g2=free;\n"
        "jump bind3: when g3==free rate kb*X2 set g3=bound;\n"
        "jump unbind3: when g3==bound rate ku set g3=free;\n";
    return std::get<HybridModel>(parse_model(text));
}

Model builtin_model(std::string_view name, const std::map<std::string, double>& overrides) {
    if (name == "schlogl") return builtin_schlogl(overrides);
    if (name == "repressilator") return builtin_repressilator(overrides);
    throw ModelError("unknown builtin model '" + std::string(name) +
                     "' (available: schlogl, repressilator)");
}

}  // namespace stochrobust
