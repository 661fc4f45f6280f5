#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "stochrobust/expr.hpp"

namespace stochrobust {

// Named parameter block shared by both model kinds. Values are mutable so a
// fitted/optimized parameter can be set without recompiling rate laws.
struct ParamTable {
    std::vector<std::string> names;
    std::vector<double> values;

    std::optional<uint32_t> index(std::string_view name) const;
    bool contains(std::string_view name) const { return index(name).has_value(); }
    double get(std::string_view name) const;
    void set(std::string_view name, double v);
    void add(std::string name, double v);
};

struct Species {
    std::string name;
    double initial = 0.0;  // nonnegative integer count
    bool constant = false;
};

enum class RateLawKind { mass_action, expression };

struct Reaction {
    std::string name;
    std::vector<std::pair<uint32_t, uint32_t>> reactants;  // (species, stoichiometry)
    std::vector<std::pair<uint32_t, uint32_t>> products;
    RateLawKind law = RateLawKind::mass_action;
    ExprPtr rate;  // mass-action constant c, or the full rate expression
    std::vector<std::pair<uint32_t, double>> update;  // net change, constant species zeroed

    CompiledExpr compiled_rate;
};

// Population CTMC given as a biochemical reaction network.
class ReactionNetwork {
public:
    std::vector<Species> species;
    std::vector<Reaction> reactions;
    ParamTable params;

    // Validates, zeroes constant species in update vectors and compiles all
    // rate laws. Must be called after any structural change.
    void finalize();

    std::optional<uint32_t> species_index(std::string_view name) const;
    std::vector<double> initial_state() const;
    std::vector<std::string> variable_names() const;

    // Stochastic propensity of reaction j in the given state: mass-action uses
    // combinatorial counts c * prod binom(X_i, r_i); any unmet reactant
    // requirement gives 0. Negative or non-finite values raise EvaluationError.
    double propensity(size_t j, std::span<const double> state) const;

    // Fluid (deterministic) drift F(X) = sum_l v_l f_l(X) with mass-action
    // interpreted continuously as c * prod X_i^{r_i}.
    std::vector<double> fluid_vector_field(std::span<const double> state) const;
};

struct DiscreteVar {
    std::string name;
    std::vector<std::string> domain;
    uint32_t initial = 0;  // index into domain

    std::optional<uint32_t> label_index(std::string_view label) const;
};

struct ContinuousVar {
    std::string name;
    double initial = 0.0;
};

struct Flow {
    uint32_t var = 0;  // continuous variable driven by this flow
    ExprPtr rhs;
    CompiledExpr compiled;
};

struct Jump {
    std::string name;
    ExprPtr guard;  // boolean over discrete state (1.0/0.0)
    ExprPtr rate;   // hazard when the guard holds
    std::vector<std::pair<uint32_t, uint32_t>> resets;  // discrete var -> new label index
    CompiledExpr compiled_guard;
    CompiledExpr compiled_rate;
};

// Piecewise-deterministic Markov process: continuous variables follow the
// mode-dependent flows between stochastic jumps with state-dependent hazards.
// Jumps reset discrete variables only.
class HybridModel {
public:
    std::vector<DiscreteVar> discrete;
    std::vector<ContinuousVar> continuous;
    std::vector<Flow> flows;  // exactly one per continuous variable after finalize
    std::vector<Jump> jumps;
    ParamTable params;

    void finalize();

    std::optional<uint32_t> continuous_index(std::string_view name) const;
    std::optional<uint32_t> discrete_index(std::string_view name) const;
    std::vector<double> initial_continuous() const;
    std::vector<double> initial_discrete() const;  // label indices as doubles
    std::vector<std::string> variable_names() const;  // continuous only (the observable trace)

    // dx/dt for the current mode.
    void eval_flows(std::span<const double> x, std::span<const double> g,
                    std::span<double> out) const;
    // Hazard of jump k (0 when its guard is false). Negative -> EvaluationError.
    double hazard(size_t k, std::span<const double> x, std::span<const double> g) const;
};

using Model = std::variant<ReactionNetwork, HybridModel>;

// --- parsing / rendering -------------------------------------------------

// Parses the model grammar; a leading '{' selects the JSON mirror.
Model parse_model(std::string_view text);

std::string render_model(const Model& m);       // canonical text grammar
std::string model_to_json(const Model& m);      // JSON mirror
Model model_from_json(std::string_view text);

// Canonical-form structural equality.
bool structurally_equal(const Model& a, const Model& b);

// FNV-1a over the canonical rendering, as a hex string.
std::string model_hash(const Model& m);

// --- shared parameter access ----------------------------------------------

bool has_parameter(const Model& m, std::string_view name);
double get_parameter(const Model& m, std::string_view name);
void set_parameter(Model& m, std::string_view name, double value);
std::vector<std::string> variable_names(const Model& m);

// --- builtin case studies ---------------------------------------------------

// Schlogl bistable network. Override keys: k1,k2,k3,k4,c3,X0,A0,B0. The
// effective production rate c3 = k3*B(0) (default 200) drives reaction B->X;
// an explicit c3 override wins over k3 and back-derives it.
ReactionNetwork builtin_schlogl(const std::map<std::string, double>& overrides = {});

// Repressilator as a PDMP: three proteins with production/decay flows gated by
// promoter occupancy; binding (kb*X_repressor) and unbinding (ku) jumps,
// cyclic repression X1 -| gene2, X2 -| gene3, X3 -| gene1.
// Override keys: kp,kd,kb,ku,X1_0,X2_0,X3_0.
HybridModel builtin_repressilator(const std::map<std::string, double>& overrides = {});

// Builtin lookup by name ("schlogl" | "repressilator").
Model builtin_model(std::string_view name, const std::map<std::string, double>& overrides = {});

}  // namespace stochrobust
