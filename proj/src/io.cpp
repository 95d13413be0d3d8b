#include "qso/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <limits>
#include <type_traits>
#include <variant>

#include "qso/errors.hpp"

namespace qso {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw InvalidInput("not a number: '" + std::string(text) + "'");
    return v;
}

// Distributions ----------------------------------------------------------------

std::string family_tag_alias(std::string_view tag) {
    std::string t(tag);
    for (auto& c : t) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (t == "pointmass" || t == "point" || t == "delta") return "point_mass";
    if (t == "gaussian") return "normal";
    if (t == "exp") return "exponential";
    if (t == "cauchylike" || t == "cauchy") return "cauchy_like";
    if (t == "powerlaw" || t == "discrete_powerlaw" || t == "discretepowerlaw") return "discrete_power_law";
    if (t == "stable" || t == "symmetricstable") return "symmetric_stable";
    return t;
}

json to_json(const DistributionSpec& spec) {
    json params = std::visit(
        [](const auto& d) -> json {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PointMass>) return {{"value", d.value}};
            else if constexpr (std::is_same_v<T, Normal>) return {{"mean", d.mean}, {"variance", d.variance}};
            else if constexpr (std::is_same_v<T, Exponential>) return {{"rate", d.rate}};
            else if constexpr (std::is_same_v<T, CauchyLike>) return {{"mu", d.mu}, {"a", d.a}, {"alpha", d.alpha}};
            else if constexpr (std::is_same_v<T, DiscretePowerLaw>) return {{"epsilon", d.epsilon}};
            else if constexpr (std::is_same_v<T, SymmetricStable>) return {{"exponent", d.exponent}};
            else return {{"values", d.values}};
        },
        spec.params());
    return {{"family", family_name(spec.family())}, {"params", params}};
}

namespace {

double number_field(const json& params, const char* key, const std::string& family) {
    if (!params.contains(key)) throw InvalidSpec(family + ": missing parameter '" + key + "'");
    const auto& v = params.at(key);
    if (!v.is_number()) throw InvalidSpec(family + ": parameter '" + key + "' must be a number");
    return v.get<double>();
}

void reject_unknown(const json& params, std::initializer_list<const char*> known, const std::string& family) {
    for (const auto& [k, _] : params.items()) {
        bool ok = false;
        for (const char* name : known) ok = ok || k == name;
        if (!ok) throw InvalidSpec(family + ": unknown parameter '" + k + "'");
    }
}

}  // namespace

DistributionSpec distribution_from_json(const json& j) {
    if (j.is_string()) return parse_distribution(j.get<std::string>());
    if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
        throw InvalidSpec("distribution must be {\"family\": ..., \"params\": {...}}");
    const std::string fam = family_tag_alias(j.at("family").get<std::string>());
    const json params = j.value("params", json::object());
    if (!params.is_object()) throw InvalidSpec("distribution params must be an object");
    if (fam == "point_mass") {
        reject_unknown(params, {"value"}, fam);
        return DistributionSpec::point_mass(number_field(params, "value", fam));
    }
    if (fam == "normal") {
        reject_unknown(params, {"mean", "variance"}, fam);
        return DistributionSpec::normal(number_field(params, "mean", fam), number_field(params, "variance", fam));
    }
    if (fam == "exponential") {
        reject_unknown(params, {"rate"}, fam);
        return DistributionSpec::exponential(number_field(params, "rate", fam));
    }
    if (fam == "cauchy_like") {
        reject_unknown(params, {"mu", "a", "alpha"}, fam);
        return DistributionSpec::cauchy_like(number_field(params, "mu", fam), number_field(params, "a", fam),
                                             number_field(params, "alpha", fam));
    }
    if (fam == "discrete_power_law") {
        reject_unknown(params, {"epsilon"}, fam);
        return DistributionSpec::discrete_power_law(number_field(params, "epsilon", fam));
    }
    if (fam == "symmetric_stable") {
        reject_unknown(params, {"exponent"}, fam);
        return DistributionSpec::symmetric_stable(number_field(params, "exponent", fam));
    }
    if (fam == "empirical") {
        reject_unknown(params, {"values"}, fam);
        if (!params.contains("values") || !params.at("values").is_array())
            throw InvalidSpec("empirical: 'values' must be an array");
        std::vector<double> values;
        for (const auto& v : params.at("values")) {
            if (!v.is_number()) throw InvalidSpec("empirical: values must be numbers");
            values.push_back(v.get<double>());
        }
        return DistributionSpec::empirical(std::move(values));
    }
    throw InvalidSpec("unknown distribution family '" + j.at("family").get<std::string>() + "'");
}

DistributionSpec parse_distribution(std::string_view text) {
    const auto colon = text.find(':');
    const std::string fam = family_tag_alias(text.substr(0, colon));
    std::vector<double> p;
    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (true) {
            const auto comma = rest.find(',');
            p.push_back(parse_double(rest.substr(0, comma)));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
    }
    auto need = [&](std::size_t n) {
        if (p.size() != n)
            throw InvalidSpec(fam + " takes " + std::to_string(n) + " parameter(s), got " + std::to_string(p.size()) +
                              " in '" + std::string(text) + "'");
    };
    if (fam == "point_mass") return need(1), DistributionSpec::point_mass(p[0]);
    if (fam == "normal") return need(2), DistributionSpec::normal(p[0], p[1]);
    if (fam == "exponential") return need(1), DistributionSpec::exponential(p[0]);
    if (fam == "cauchy_like") return need(3), DistributionSpec::cauchy_like(p[0], p[1], p[2]);
    if (fam == "discrete_power_law") return need(1), DistributionSpec::discrete_power_law(p[0]);
    if (fam == "symmetric_stable") return need(1), DistributionSpec::symmetric_stable(p[0]);
    if (fam == "empirical") return DistributionSpec::empirical(std::move(p));
    throw InvalidSpec("unknown distribution family in '" + std::string(text) + "'");
}

std::string to_mini_syntax(const DistributionSpec& spec) {
    const json j = to_json(spec);
    std::string out = j.at("family").get<std::string>() + ":";
    auto add = [&](double v) {
        if (out.back() != ':') out += ',';
        out += format_double(v);
    };
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PointMass>) add(d.value);
            else if constexpr (std::is_same_v<T, Normal>) add(d.mean), add(d.variance);
            else if constexpr (std::is_same_v<T, Exponential>) add(d.rate);
            else if constexpr (std::is_same_v<T, CauchyLike>) add(d.mu), add(d.a), add(d.alpha);
            else if constexpr (std::is_same_v<T, DiscretePowerLaw>) add(d.epsilon);
            else if constexpr (std::is_same_v<T, SymmetricStable>) add(d.exponent);
            else for (double v : d.values) add(v);
        },
        spec.params());
    return out;
}

// CSV ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

void write_cf_csv(std::ostream& os, const CFGrid& grid) {
    os << "s,re,im\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
        os << format_double(grid.points[i]) << ',' << format_double(grid.values[i].real()) << ','
           << format_double(grid.values[i].imag()) << '\n';
}

CFGrid read_cf_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || split_csv_line(line) != std::vector<std::string>{"s", "re", "im"})
        throw InvalidInput("CF grid CSV must start with the header s,re,im");
    CFGrid g;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 3) throw InvalidInput("CF grid CSV row " + std::to_string(row) + " needs 3 columns");
        g.points.push_back(parse_double(cells[0]));
        g.values.emplace_back(parse_double(cells[1]), parse_double(cells[2]));
        g.flags.push_back(kCfClean);
    }
    for (std::size_t i = 1; i < g.points.size(); ++i)
        if (!(g.points[i - 1] < g.points[i])) throw InvalidInput("CF grid points must be strictly increasing");
    return g;
}

void write_values_csv(std::ostream& os, std::span<const double> values) {
    os << "value\n";
    for (double v : values) os << format_double(v) << '\n';
}

std::vector<double> read_values_csv(std::istream& is) {
    std::string line;
    std::vector<double> out;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line == "value") continue;
        }
        out.push_back(parse_double(line));
    }
    return out;
}

json values_to_json(std::span<const double> values) {
    return json(std::vector<double>(values.begin(), values.end()));
}

void write_population_csv(std::ostream& os, std::span<const PopulationState> generations) {
    os << "generation,index,value\n";
    for (const auto& g : generations)
        for (std::size_t i = 0; i < g.values.size(); ++i)
            os << g.generation << ',' << i << ',' << format_double(g.values[i]) << '\n';
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
    os << "bin_lo,bin_hi,value\n";
    for (std::size_t k = 0; k < h.values.size(); ++k)
        os << format_double(h.edges[k]) << ',' << format_double(h.edges[k + 1]) << ','
           << format_double(h.values[k]) << '\n';
}

// JSON reports ------------------------------------------------------------------

namespace {

// JSON has no infinities; encode them as strings.
json number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

}  // namespace

json to_json(const ResidualReport& r) {
    return {{"sup_residual", number(r.sup_residual)}, {"argmax_s", r.argmax_s}, {"points_used", r.points_used}};
}

json to_json(const TailBoundReport& r) {
    return {{"holds", r.holds},
            {"worst_ratio", number(r.worst_ratio)},
            {"worst_s", r.worst_s},
            {"holds_minus_one", r.holds_minus_one},
            {"worst_ratio_minus_one", number(r.worst_ratio_minus_one)},
            {"worst_s_minus_one", r.worst_s_minus_one},
            {"sandwich_holds", r.sandwich_holds},
            {"sandwich_checked", r.sandwich_checked},
            {"points_used", r.points_used}};
}

json to_json(const StableLimitReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"n", row.n}, {"sup_error", row.sup_error}, {"argmax_s", row.argmax_s}});
    return {{"rows", rows}, {"non_increasing", r.non_increasing}};
}

json to_json(const KernelLimitResult& r) {
    std::size_t zero = 0;
    std::size_t branch = 0;
    for (auto f : r.grid.flags) {
        zero += (f & kCfZero) != 0;
        branch += (f & kCfBranch) != 0;
    }
    return {{"depth", r.depth},
            {"last_increment", r.last_increment},
            {"truncation_bound", r.truncation_bound ? json(*r.truncation_bound) : json(nullptr)},
            {"points", r.grid.size()},
            {"zero_flagged", zero},
            {"branch_flagged", branch}};
}

json to_json(const KSResult& r) {
    return {{"statistic", r.statistic},
            {"critical_value_1pct", r.critical_value_1pct},
            {"sample_sizes", {r.n_a, r.n_b}},
            {"rejects_at_1pct", r.rejects()}};
}

json to_json(const MomentSummary& m) {
    return {{"mean", number(m.mean)},
            {"mean_defined", m.mean_defined},
            {"variance", number(m.variance)},
            {"variance_infinite", m.variance_infinite},
            {"max_moment_order", number(m.max_moment_order)},
            {"degenerate", m.degenerate},
            {"count", m.count}};
}

// Budget ------------------------------------------------------------------------

json to_json(const TruncationBudget& b) {
    return {{"alpha", b.alpha},
            {"delta", b.delta},
            {"n", b.n ? json(*b.n) : json("inf")},
            {"v_F", b.v_F},
            {"v_G", b.v_G},
            {"log_base", b.log_base == LogBase::natural ? "natural" : "base2"},
            {"bonferroni_K", b.bonferroni_K ? json(*b.bonferroni_K) : json(nullptr)}};
}

TruncationBudget budget_from_json(const json& j) {
    if (!j.is_object()) throw InvalidInput("budget must be a JSON object");
    TruncationBudget b;
    auto num = [&](const char* key, double& dst) {
        if (!j.contains(key)) return;
        if (!j.at(key).is_number()) throw InvalidInput(std::string("budget.") + key + " must be a number");
        dst = j.at(key).get<double>();
    };
    num("alpha", b.alpha);
    num("delta", b.delta);
    num("v_F", b.v_F);
    num("v_G", b.v_G);
    if (j.contains("n")) {
        const auto& n = j.at("n");
        if (n.is_string() && (n == "inf" || n == "infinity")) b.n.reset();
        else if (n.is_number_unsigned() || (n.is_number_integer() && n.get<long long>() >= 0)) b.n = n.get<std::uint64_t>();
        else throw InvalidInput("budget.n must be a non-negative integer or \"inf\"");
    }
    if (j.contains("log_base")) {
        const auto lb = j.at("log_base").get<std::string>();
        if (lb == "natural" || lb == "e" || lb == "ln") b.log_base = LogBase::natural;
        else if (lb == "base2" || lb == "2") b.log_base = LogBase::base2;
        else throw InvalidInput("budget.log_base must be base2 or natural");
    }
    if (j.contains("bonferroni_K") && !j.at("bonferroni_K").is_null()) {
        const auto& k = j.at("bonferroni_K");
        if (!k.is_number_integer() || k.get<long long>() <= 0)
            throw InvalidInput("budget.bonferroni_K must be a positive integer");
        b.bonferroni_K = k.get<std::uint64_t>();
    }
    return b;
}

}  // namespace qso
