#include "woldlab/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace woldlab {

namespace {

json number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

template <typename T>
T field(const json& j, const char* key, const char* what) {
    if (!j.is_object() || !j.contains(key))
        throw DeserializationError(std::string(what) + ": missing field \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw DeserializationError(std::string(what) + ": field \"" + key + "\" has the wrong type");
    }
}

json real_matrix(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json roles_json(const std::vector<RoleVerdict>& roles) {
    json out = json::array();
    for (const auto& v : roles)
        out.push_back({{"op", v.op},
                       {"member", v.member},
                       {"shift", v.shift},
                       {"invertible", v.invertible},
                       {"residual", number(v.residual)},
                       {"ok", v.ok}});
    return out;
}

}  // namespace

double finite_or_sentinel(double x) { return std::isfinite(x) ? x : -1.0; }

json to_json(const SpaceDescriptor& s) {
    return {{"vars", s.vars}, {"degree_cap", s.degree_cap}, {"coeff_dim", s.coeff_dim}, {"guard", s.guard}};
}

SpaceDescriptor space_from_json(const json& j) {
    SpaceDescriptor s;
    s.vars = field<int>(j, "vars", "space");
    s.degree_cap = field<int>(j, "degree_cap", "space");
    s.coeff_dim = field<int>(j, "coeff_dim", "space");
    s.guard = field<int>(j, "guard", "space");
    try {
        s.validate();
    } catch (const Error& e) {
        throw DeserializationError(e.what());
    }
    return s;
}

json to_json(const Operator& a) {
    json entries = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) entries.push_back({a(i, j).real(), a(i, j).imag()});
    return {{"rows", a.rows()}, {"cols", a.cols()}, {"entries", entries}};
}

Operator operator_from_json(const json& j) {
    const auto rows = field<long>(j, "rows", "operator");
    const auto cols = field<long>(j, "cols", "operator");
    if (rows < 0 || cols < 0) throw DeserializationError("operator: negative dimensions");
    const json& e = j.at("entries");
    if (!e.is_array() || static_cast<long>(e.size()) != rows * cols)
        throw DeserializationError("operator: entries must hold rows*cols [re, im] pairs");
    Operator a(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long c = 0; c < cols; ++c) {
            const json& z = e[static_cast<size_t>(i * cols + c)];
            if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
                throw DeserializationError("operator: each entry must be a [re, im] pair of numbers");
            double re = z[0].get<double>(), im = z[1].get<double>();
            if (!std::isfinite(re) || !std::isfinite(im)) throw DeserializationError("operator: entries must be finite");
            a(i, c) = cplx(re, im);
        }
    return a;
}

json to_json(const Tolerances& t) {
    return {{"rank_rel", t.rank_rel}, {"residual_abs", t.residual_abs}, {"lower_bound_min", t.lower_bound_min}};
}

json to_json(const TwistedTuple& t) {
    json ops = json::array();
    for (const auto& op : t.ops) ops.push_back(to_json(op));
    json twists = json::object();
    for (const auto& [key, u] : t.twists)
        twists[std::to_string(key.first) + "," + std::to_string(key.second)] = to_json(u);
    return {{"n", t.n}, {"ops", ops}, {"twists", twists}};
}

TwistedTuple tuple_from_json(const json& j, const Tolerances& tol) {
    TwistedTuple t;
    t.n = field<int>(j, "n", "tuple");
    if (t.n < 1 || t.n > kMaxTupleSize) throw DeserializationError("tuple: n must lie in [1, 16]");
    if (!j.contains("ops") || !j.at("ops").is_array()) throw DeserializationError("tuple: missing ops array");
    for (const json& op : j.at("ops")) t.ops.push_back(operator_from_json(op));
    if (static_cast<int>(t.ops.size()) != t.n) throw DeserializationError("tuple: ops must contain n operators");
    if (j.contains("twists")) {
        const json& tw = j.at("twists");
        if (!tw.is_object()) throw DeserializationError("tuple: twists must be an object keyed by \"i,j\"");
        for (const auto& [key, value] : tw.items()) {
            int a = 0, b = 0;
            char comma = 0;
            std::istringstream in(key);
            if (!(in >> a >> comma >> b) || comma != ',' || !in.eof())
                throw DeserializationError("tuple: twist key \"" + key + "\" is not of the form \"i,j\"");
            t.twists[{a, b}] = operator_from_json(value);
        }
    }
    try {
        t.validate(tol);
    } catch (const NotUnitary& e) {
        throw DeserializationError(std::string("invariant violated: twist unitarity (") + e.what() + ")");
    } catch (const Error& e) {
        throw DeserializationError(std::string("invariant violated: ") + e.what());
    }
    return t;
}

TwistedTuple load_tuple(const std::string& path, const Tolerances& tol) {
    std::ifstream in(path);
    if (!in) throw DeserializationError("cannot open tuple file " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw DeserializationError(std::string("tuple file is not valid JSON: ") + e.what());
    }
    return tuple_from_json(j, tol);
}

void save_tuple(const TwistedTuple& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << to_json(t).dump(2) << "\n";
}

json subset_json(SubsetIndex a, int n) {
    json out = json::array();
    for (int i : subset_members(a, n)) out.push_back(i);
    return out;
}

json to_json(const NearIsometryReport& r) {
    json ortho = json::array();
    for (double x : r.ortho_residuals) ortho.push_back(number(x));
    return {{"delta", number(r.delta)},
            {"upper_excess", number(r.upper_excess)},
            {"ortho_residuals", ortho},
            {"wandering_dim", r.wandering_dim},
            {"first_failing_order", r.first_failing_order},
            {"bounded_below", r.bounded_below},
            {"contraction", r.contraction},
            {"orthogonality", r.orthogonality},
            {"pass", r.pass}};
}

json to_json(const TwistedReport& r) {
    json per = json::array();
    for (const auto& p : r.per_op) per.push_back(to_json(p));
    return {{"res_i", number(r.res_i)},     {"worst_i", r.worst_i},
            {"res_ii", number(r.res_ii)},   {"worst_ii", r.worst_ii},
            {"res_iii", number(r.res_iii)}, {"worst_iii", r.worst_iii},
            {"per_op", per},                {"relations_ok", r.relations_ok},
            {"pass", r.pass}};
}

json to_json(const LemmaReport& r) {
    return {{"sharp_twist_commute", number(r.sharp_twist_commute)},
            {"twist_recovery", number(r.twist_recovery)},
            {"range_projections", number(r.range_projections)},
            {"kernel_intersection", number(r.kernel_intersection)},
            {"wandering_step", number(r.wandering_step)},
            {"reducing_gram", number(r.reducing_gram)},
            {"pass", r.pass}};
}

json to_json(const DecompositionResult& r) {
    json summands = json::array();
    for (const auto& [a, s] : r.summands)
        summands.push_back({{"subset", subset_json(a, r.n)},
                            {"dim_w", s.w.dim()},
                            {"dim_d", s.d.dim()},
                            {"dim_d_interior", s.d_interior.dim()},
                            {"dim_h", s.h.dim()},
                            {"dim_h_interior", s.h_interior.dim()},
                            {"roles", roles_json(s.roles)}});
    return {{"n", r.n},
            {"depth", r.depth},
            {"summands", summands},
            {"completeness",
             {{"max_overlap", number(r.completeness.max_overlap)},
              {"dim_deficit", r.completeness.dim_deficit},
              {"coverage_residual", number(r.completeness.coverage_residual)},
              {"pass", r.completeness.pass}}},
            {"commutation_residual", number(r.commutation_residual)},
            {"commutation_pair", r.commutation_pair},
            {"roles_ok", r.roles_ok},
            {"pass", r.pass}};
}

json to_json(const ReducingReport& r) {
    json failing = json::array();
    for (const auto& [i, k] : r.failing) failing.push_back({i, k});
    return {{"residuals", real_matrix(r.residuals)}, {"failing", failing}, {"pass", r.pass}};
}

json to_json(const WeightedShiftModel& m) {
    json weights = json::array();
    for (const auto& w : m.weights) weights.push_back(to_json(w));
    return {{"weights", weights},
            {"lower_bound_c", number(m.lower_bound_c)},
            {"upper_bound", number(m.upper_bound)},
            {"conjugation_residual", number(m.conjugation_residual)}};
}

json to_json(const MultishiftModel& m, int n) {
    json blocks = json::array();
    for (const auto& b : m.blocks) {
        json gammas = json::array();
        for (size_t idx = 0; idx < b.ks.size(); ++idx) {
            json per = json::object();
            for (int s = 1; s <= n; ++s)
                if (b.gamma[idx][s - 1].size() > 0) per[std::to_string(s)] = to_json(b.gamma[idx][s - 1]);
            gammas.push_back({{"k", b.ks[idx]}, {"weights", per}});
        }
        blocks.push_back({{"subset", subset_json(b.a, n)},
                          {"wandering_dim", b.wandering.dim()},
                          {"cap", b.cap},
                          {"conjugation_residual", number(b.conjugation_residual)},
                          {"lower_bound", number(b.lower_bound)},
                          {"upper_bound", number(b.upper_bound)},
                          {"gamma", gammas}});
    }
    return {{"blocks", blocks},
            {"conjugation_residual", number(m.conjugation_residual)},
            {"round_trip", number(m.round_trip)},
            {"lower_bound_c", number(m.lower_bound_c)},
            {"upper_bound", number(m.upper_bound)},
            {"pass", m.pass}};
}

json to_json(const EquivalenceReport& r, int n, int order) {
    json per = json::array();
    for (const auto& c : r.per_summand)
        per.push_back({{"subset", subset_json(c.a, n)},
                       {"dim", c.dim},
                       {"dim_other", c.dim_t},
                       {"unitarity", number(c.unitarity)},
                       {"gram", number(c.gram)},
                       {"tails", number(c.tails)},
                       {"twists", number(c.twists)},
                       {"ok", c.ok}});
    return {{"order_checked", order},
            {"per_summand", per},
            {"dims_match", r.dims_match},
            {"intertwining", number(r.intertwining)},
            {"isometry", number(r.isometry)},
            {"twist_residual", number(r.twist_residual)},
            {"witness_ok", r.witness_ok},
            {"pass", r.pass}};
}

json to_json(const WanderingEquivalence& r, int n, int order) {
    json per = json::array();
    for (const auto& s : r.per_summand)
        per.push_back({{"subset", subset_json(s.a, n)},
                       {"verdict", verdict_name(s.verdict)},
                       {"best_residual", number(s.best_residual)}});
    return {{"order_checked", order}, {"per_summand", per}, {"verdict", verdict_name(r.verdict)}};
}

}  // namespace woldlab
