#include "qso/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "qso/analysis.hpp"
#include "qso/cf_engine.hpp"
#include "qso/errors.hpp"
#include "qso/io.hpp"

#ifndef QSO_VERSION
#define QSO_VERSION "0.0.0"
#endif

namespace qso {

using nlohmann::json;
namespace fs = std::filesystem;

std::string version() { return QSO_VERSION; }

// Config ------------------------------------------------------------------------

namespace {

std::uint64_t parse_uint(std::string_view text, const std::string& what) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw InvalidInput(what + " must be a non-negative integer, got '" + std::string(text) + "'");
    return v;
}

std::uint64_t uint_field(const json& j, const char* key, std::uint64_t lo, std::uint64_t hi) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
        throw InvalidInput(std::string(key) + " must be a non-negative integer");
    const auto x = v.get<std::uint64_t>();
    if (x < lo || x > hi)
        throw InvalidInput(std::string(key) + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return x;
}

}  // namespace

json to_json(const ExperimentConfig& c) {
    return {{"command", c.command},
            {"seed_distribution", to_json(c.seed)},
            {"kernel", to_json(c.kernel)},
            {"n", c.n},
            {"population_size", c.population_size},
            {"count", c.count},
            {"grid", {{"delta", c.grid.delta}, {"k_grid", c.grid.k_grid}}},
            {"budget", to_json(c.budget)},
            {"master_seed", c.master_seed},
            {"stream_id", c.stream_id},
            {"output_dir", c.output_dir},
            {"threads", c.threads},
            {"guard_override", c.guard_override},
            {"options", c.options}};
}

ExperimentConfig config_from_json(const json& input) {
    const json& j = input.contains("config") && input.at("config").is_object() ? input.at("config") : input;
    if (!j.is_object()) throw InvalidInput("config must be a JSON object");
    static const std::vector<std::string> known = {
        "command", "seed_distribution", "kernel", "n", "population_size", "count", "grid", "budget",
        "master_seed", "stream_id", "output_dir", "threads", "guard_override", "options"};
    for (const auto& [k, _] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) throw InvalidInput("unknown config key '" + k + "'");

    ExperimentConfig c;
    if (j.contains("command")) c.command = j.at("command").get<std::string>();
    if (j.contains("seed_distribution")) c.seed = distribution_from_json(j.at("seed_distribution"));
    if (j.contains("kernel")) c.kernel = distribution_from_json(j.at("kernel"));
    if (j.contains("n")) c.n = static_cast<int>(uint_field(j, "n", 0, 1000));
    if (j.contains("population_size")) c.population_size = uint_field(j, "population_size", 2, 1'000'000'000);
    if (j.contains("count")) c.count = uint_field(j, "count", 1, 1'000'000'000);
    if (j.contains("grid")) {
        const auto& g = j.at("grid");
        if (!g.is_object()) throw InvalidInput("grid must be {\"delta\": ..., \"k_grid\": ...}");
        for (const auto& [k, _] : g.items())
            if (k != "delta" && k != "k_grid") throw InvalidInput("unknown grid key '" + k + "'");
        if (g.contains("delta")) {
            if (!g.at("delta").is_number()) throw InvalidInput("grid.delta must be a number");
            c.grid.delta = g.at("delta").get<double>();
        }
        if (g.contains("k_grid")) c.grid.k_grid = static_cast<int>(uint_field(g, "k_grid", 2, 10'000'000));
        if (!(c.grid.delta > 0.0) || !std::isfinite(c.grid.delta)) throw InvalidInput("grid.delta must be positive");
    }
    if (j.contains("budget")) {
        const auto& b = j.at("budget");
        if (b.is_object())
            for (const auto& [k, _] : b.items())
                if (k != "alpha" && k != "delta" && k != "n" && k != "v_F" && k != "v_G" && k != "log_base" &&
                    k != "bonferroni_K")
                    throw InvalidInput("unknown budget key '" + k + "'");
        c.budget = budget_from_json(b);
        truncation_depth(c.budget);  // domain checks
    }
    if (j.contains("master_seed")) c.master_seed = uint_field(j, "master_seed", 0, UINT64_MAX);
    if (j.contains("stream_id")) c.stream_id = uint_field(j, "stream_id", 0, UINT64_MAX);
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("threads")) c.threads = static_cast<unsigned>(uint_field(j, "threads", 0, 4096));
    if (j.contains("guard_override")) c.guard_override = j.at("guard_override").get<bool>();
    if (j.contains("options")) {
        if (!j.at("options").is_object()) throw InvalidInput("options must be an object");
        c.options = j.at("options");
    }
    return c;
}

ExperimentConfig figure_defaults() {
    ExperimentConfig c;
    c.command = "replicate-figures";
    c.seed = DistributionSpec::exponential(1.0);
    c.kernel = DistributionSpec::normal(0.0, 0.5);
    c.population_size = 10000;
    c.budget = TruncationBudget{0.05, 0.01, std::nullopt, 1.0, 0.5, LogBase::natural, std::nullopt};
    c.output_dir = "figures";
    c.options = {{"n_values", {1, 100, 500}},
                 {"bins", 50},
                 {"seeds", {to_json(DistributionSpec::exponential(1.0)), to_json(DistributionSpec::normal(0.0, 1.0))}},
                 {"fig3_levels", "closed_form"},
                 {"exact_check", true}};
    return c;
}

// Options helpers ---------------------------------------------------------------

namespace {

template <typename T>
T option(const ExperimentConfig& c, const char* key, T fallback) {
    if (!c.options.contains(key) || c.options.at(key).is_null()) return fallback;
    try {
        return c.options.at(key).get<T>();
    } catch (const json::exception&) {
        throw InvalidInput(std::string("option '") + key + "' has the wrong type");
    }
}

std::optional<double> optional_number(const ExperimentConfig& c, const char* key) {
    if (!c.options.contains(key) || c.options.at(key).is_null()) return std::nullopt;
    if (!c.options.at(key).is_number()) throw InvalidInput(std::string("option '") + key + "' must be a number");
    return c.options.at(key).get<double>();
}

std::vector<std::uint64_t> uint_list(const ExperimentConfig& c, const char* key, std::vector<std::uint64_t> fallback) {
    if (!c.options.contains(key)) return fallback;
    std::vector<std::uint64_t> out;
    for (const auto& v : c.options.at(key)) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
            throw InvalidInput(std::string("option '") + key + "' must list non-negative integers");
        out.push_back(v.get<std::uint64_t>());
    }
    if (out.empty()) throw InvalidInput(std::string("option '") + key + "' must not be empty");
    return out;
}

std::vector<double> grid_points(const ExperimentConfig& c) { return symmetric_grid(c.grid.delta, c.grid.k_grid); }

RandomStream base_stream(const ExperimentConfig& c) { return RandomStream(c.master_seed, c.stream_id); }

// Collects the artifacts of one run: files under the output directory, or
// the primary artifact on stdout when no directory is given.
class Artifacts {
public:
    Artifacts(std::string dir, std::ostream& out) : dir_(std::move(dir)), out_(out) {
        if (!dir_.empty()) {
            std::error_code ec;
            fs::create_directories(dir_, ec);
            if (ec || !fs::is_directory(dir_)) throw InvalidInput("cannot create output directory '" + dir_ + "'");
        }
    }

    bool to_disk() const { return !dir_.empty(); }

    void emit(const std::string& name, const std::function<void(std::ostream&)>& writer, bool primary) {
        if (!to_disk()) {
            if (primary) writer(out_);
            return;
        }
        const fs::path path = fs::path(dir_) / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
        writer(f);
        f.flush();
        if (!f) throw InvalidInput("failed writing '" + path.string() + "'");
        files_.push_back(name);
    }

    void emit_json(const std::string& name, const json& j, bool primary) {
        emit(name, [&](std::ostream& os) { os << j.dump(2) << '\n'; }, primary);
    }

    const std::vector<std::string>& files() const { return files_; }
    const std::string& dir() const { return dir_; }

private:
    std::string dir_;
    std::ostream& out_;
    std::vector<std::string> files_;
};

void emit_samples(Artifacts& art, const ExperimentConfig& c, std::span<const double> values) {
    const auto format = option<std::string>(c, "format", "csv");
    if (format == "json") {
        art.emit_json("samples.json", values_to_json(values), true);
    } else if (format == "csv") {
        art.emit("samples.csv", [&](std::ostream& os) { write_values_csv(os, values); }, true);
    } else {
        throw InvalidInput("format must be csv or json");
    }
}

TruncationBudget effective_budget(const ExperimentConfig& c) { return c.budget; }

LevelSampling level_sampling(const std::string& s) {
    if (s == "explicit" || s == "explicit_draws") return LevelSampling::explicit_draws;
    if (s == "closed_form" || s == "closed-form") return LevelSampling::closed_form;
    throw InvalidInput("levels must be explicit or closed_form");
}

// Commands ----------------------------------------------------------------------

json cmd_simulate_population(const ExperimentConfig& c, Artifacts& art) {
    const PopulationOptions popt{option<bool>(c, "forbid_self_pairing", false), c.threads};
    const auto n = static_cast<std::uint64_t>(c.n);
    std::vector<std::uint64_t> record;
    const auto mode = c.options.contains("record") && c.options.at("record").is_string()
                          ? c.options.at("record").get<std::string>()
                          : std::string();
    if (mode == "all" || (mode.empty() && !c.options.contains("record"))) {
        for (std::uint64_t g = 0; g <= n; ++g) record.push_back(g);
    } else if (mode == "last") {
        record.push_back(n);
    } else {
        record = uint_list(c, "record", {});
    }
    for (auto g : record)
        if (g > n) throw InvalidInput("recorded generation beyond n");

    const RandomStream stream = base_stream(c);
    std::vector<PopulationState> kept;
    json means = json::array();
    PopulationState cur = initial_population(c.seed, c.population_size, stream, popt);
    for (std::uint64_t g = 0;; ++g) {
        const auto s = summarize(cur.values);
        means.push_back({{"generation", g}, {"mean", s.mean}, {"variance", s.variance}});
        if (std::find(record.begin(), record.end(), g) != record.end()) kept.push_back(cur);
        if (g == n) break;
        cur = next_generation(cur, c.kernel, stream.substream(g + 1), popt);
    }
    art.emit("population.csv", [&](std::ostream& os) { write_population_csv(os, kept); }, true);
    json report = {{"generations", means}};
    art.emit_json("population_summary.json", report, false);
    return report;
}

json cmd_draw_exact(const ExperimentConfig& c, Artifacts& art) {
    const ExactOptions eo{static_cast<int>(option<int>(c, "max_n", 26)), c.guard_override, c.threads};
    const auto values = draw_exact(IterateSpec{c.seed, c.kernel, c.n}, c.count, base_stream(c), eo);
    emit_samples(art, c, values);
    return {{"summary", to_json(summarize(values))}, {"draws_per_value", exact_draw_cost(c.n)}};
}

json cmd_draw_approx(const ExperimentConfig& c, Artifacts& art) {
    const auto m = moments(c.seed);
    const double seed_mean = option<double>(c, "seed_mean", m.mean);
    if (!c.options.contains("seed_mean") && !m.mean_defined)
        throw InvalidInput("the seed distribution has no mean; pass --mean");
    ApproxOptions ao;
    ao.levels = level_sampling(option<std::string>(c, "levels", "explicit"));
    ao.guard_override = c.guard_override;
    ao.threads = c.threads;
    const auto budget = effective_budget(c);
    const auto values = draw_approx(seed_mean, c.kernel, budget, c.count, base_stream(c), ao);
    emit_samples(art, c, values);
    return {{"depth", truncation_depth(budget)}, {"seed_mean", seed_mean}, {"summary", to_json(summarize(values))}};
}

json cmd_depth(const ExperimentConfig& c, Artifacts& art) {
    const int N = truncation_depth(effective_budget(c));
    art.emit("depth.txt", [&](std::ostream& os) { os << N << '\n'; }, true);
    return {{"depth", N}};
}

json cf_flags(const CFGrid& g) {
    std::size_t zero = 0;
    std::size_t branch = 0;
    for (auto f : g.flags) {
        zero += (f & kCfZero) != 0;
        branch += (f & kCfBranch) != 0;
    }
    return {{"zero_flagged", zero}, {"branch_flagged", branch}, {"points", g.size()}};
}

json cmd_cf_iterate(const ExperimentConfig& c, Artifacts& art) {
    const auto pts = grid_points(c);
    const auto g = iterate_cf(IterateSpec{c.seed, c.kernel, c.n}, pts, c.threads);
    art.emit("cf.csv", [&](std::ostream& os) { write_cf_csv(os, g); }, true);
    return cf_flags(g);
}

std::optional<TailBoundParams> tail_params(const ExperimentConfig& c) {
    const auto A = optional_number(c, "A");
    const auto p = optional_number(c, "p");
    const auto s0 = optional_number(c, "s0");
    const auto C = optional_number(c, "C");
    const auto eps = optional_number(c, "epsilon");
    if (C && eps && !A) {
        auto t = power_tail_params(*C, *eps, s0.value_or(1.0));
        if (p) t.p = *p;
        validate(t);
        return t;
    }
    if (!A && !p && !s0) return std::nullopt;
    if (!A || !p) throw InvalidInput("tail bound needs both A and p (or C and epsilon)");
    TailBoundParams t{*A, *p, s0.value_or(1.0), C, eps};
    validate(t);
    return t;
}

json cmd_cf_limit(const ExperimentConfig& c, Artifacts& art) {
    KernelLimitOptions ko;
    ko.depth_cap = option<int>(c, "depth_cap", 200);
    ko.tol = option<double>(c, "tol", 1e-14);
    ko.tail = tail_params(c);
    ko.threads = c.threads;
    const auto pts = grid_points(c);
    const auto r = kernel_limit_cf(c.kernel, pts, ko);
    art.emit("cf_limit.csv", [&](std::ostream& os) { write_cf_csv(os, r.grid); }, true);
    const json report = to_json(r);
    art.emit_json("cf_limit.json", report, false);
    return report;
}

json cmd_fixed_point(const ExperimentConfig& c, Artifacts& art) {
    CFGrid cand;
    if (c.options.contains("candidate_csv")) {
        const auto path = c.options.at("candidate_csv").get<std::string>();
        std::ifstream f(path);
        if (!f) throw InvalidInput("cannot read candidate CSV '" + path + "'");
        cand = read_cf_csv(f);
    } else if (c.options.contains("candidate")) {
        cand = tabulate_cf(distribution_from_json(c.options.at("candidate")), grid_points(c));
    } else {
        throw InvalidInput("fixed-point needs --candidate or --candidate-csv");
    }
    const auto check = option<std::string>(c, "check", "fixed");
    json report;
    if (check == "fixed") report = to_json(fixed_point_residual(cand, c.kernel));
    else if (check == "dyadic") report = to_json(dyadic_stability_residual(cand));
    else throw InvalidInput("check must be fixed or dyadic");
    art.emit_json("residual.json", report, true);
    return report;
}

json cmd_tail_check(const ExperimentConfig& c, Artifacts& art) {
    const auto t = tail_params(c);
    if (!t) throw InvalidInput("tail-check needs --A and --p (or --C and --epsilon)");
    const auto report = to_json(verify_tail_bound(c.kernel, *t, grid_points(c)));
    art.emit_json("tail_check.json", report, true);
    return report;
}

json cmd_stable_limit(const ExperimentConfig& c, Artifacts& art) {
    double C;
    if (const auto given = optional_number(c, "C")) C = *given;
    else if (c.kernel.family() == Family::cauchy_like) C = cauchy_tail_constant(c.kernel);
    else throw InvalidInput("stable-limit needs --C unless the law is cauchy_like");
    std::vector<std::uint64_t> def;
    for (std::uint64_t n = 1; n <= 1024; n *= 2) def.push_back(n);
    const auto ns = uint_list(c, "n_values", def);
    auto report = to_json(stable_limit_check(c.kernel, C, ns, grid_points(c), option<double>(c, "noise", 1e-9)));
    report["C"] = C;
    art.emit_json("stable_limit.json", report, true);
    return report;
}

json cmd_compare(const ExperimentConfig& c, Artifacts& art) {
    std::vector<double> a;
    std::vector<double> b;
    json extra;
    if (c.options.contains("a_csv") || c.options.contains("b_csv")) {
        auto load = [](const std::string& path) {
            std::ifstream f(path);
            if (!f) throw InvalidInput("cannot read '" + path + "'");
            return read_values_csv(f);
        };
        a = load(option<std::string>(c, "a_csv", ""));
        b = load(option<std::string>(c, "b_csv", ""));
    } else {
        const RandomStream base = base_stream(c);
        const ExactOptions eo{26, c.guard_override, c.threads};
        a = draw_exact(IterateSpec{c.seed, c.kernel, c.n}, c.count, base.substream(1), eo);
        ApproxOptions ao;
        ao.levels = level_sampling(option<std::string>(c, "levels", "explicit"));
        ao.guard_override = c.guard_override;
        ao.threads = c.threads;
        const auto m = moments(c.seed);
        if (!m.mean_defined) throw InvalidInput("compare needs a seed distribution with a mean");
        b = draw_approx(m.mean, c.kernel, c.budget, c.count, base.substream(2), ao);
        extra["depth"] = truncation_depth(c.budget);
        art.emit("exact.csv", [&](std::ostream& os) { write_values_csv(os, a); }, false);
        art.emit("approx.csv", [&](std::ostream& os) { write_values_csv(os, b); }, false);
    }
    json report = {{"ks", to_json(ks_two_sample(a, b))},
                   {"summary_a", to_json(summarize(a))},
                   {"summary_b", to_json(summarize(b))}};
    if (!extra.is_null()) report["depth"] = extra["depth"];
    art.emit_json("compare.json", report, true);
    return report;
}

json cmd_replicate_figures(const ExperimentConfig& c, Artifacts&) {
    if (c.output_dir.empty()) throw InvalidInput("replicate-figures needs an output directory");
    return replicate_figures(c);
}

using Command = std::function<json(const ExperimentConfig&, Artifacts&)>;

}  // namespace

// Figures -----------------------------------------------------------------------

json replicate_figures(const ExperimentConfig& c) {
    const auto K = c.population_size;
    const auto n_values = uint_list(c, "n_values", {1, 100, 500});
    const auto bins = option<std::size_t>(c, "bins", 50);
    std::vector<DistributionSpec> seeds;
    if (c.options.contains("seeds")) {
        for (const auto& s : c.options.at("seeds")) seeds.push_back(distribution_from_json(s));
    } else {
        seeds = {DistributionSpec::exponential(1.0), DistributionSpec::normal(0.0, 1.0)};
    }
    if (seeds.empty()) throw InvalidInput("replicate-figures needs at least one seed distribution");
    const auto fig3_levels = level_sampling(option<std::string>(c, "fig3_levels", "closed_form"));
    const bool exact_check = option<bool>(c, "exact_check", true);
    const auto vg = moments(c.kernel);
    if (vg.variance_infinite) throw BudgetInapplicable("figure replication needs a finite-variance kernel");

    // Reference sample means, meaningful only for the default setting.
    const bool reference_setting = n_values == std::vector<std::uint64_t>{1, 100, 500} && seeds.size() == 2 &&
                                   seeds[0] == DistributionSpec::exponential(1.0) &&
                                   seeds[1] == DistributionSpec::normal(0.0, 1.0) &&
                                   c.kernel == DistributionSpec::normal(0.0, 0.5) && K == 10000;
    const double reference[3][2][3] = {{{1.001, 1.032, 1.156}, {0.004, -0.009, 0.057}},
                                       {{0.989, 1.018, 0.999}, {-0.004, -0.013, 0.014}},
                                       {{0.980, 0.979, 1.003}, {0.010, 0.017, 0.007}}};

    Artifacts art(c.output_dir, std::cout);
    const RandomStream base = base_stream(c);
    const HistogramSpec hspec{bins, std::nullopt, HistogramNorm::density};

    bool fig1_ok = true;
    bool fig23_ok = true;
    json figures = json::array();

    auto panel = [&](int fig, std::size_t row, std::size_t k, std::span<const double> values, double seed_mean) {
        const auto s = summarize(values);
        const std::string name = "fig" + std::to_string(fig) + "_seed" + std::to_string(row) + "_n" +
                                 std::to_string(n_values[k]) + ".csv";
        const auto h = histogram(values, hspec);
        art.emit(name, [&](std::ostream& os) { write_histogram_csv(os, h); }, false);
        json p = {{"n", n_values[k]}, {"mean", s.mean}, {"variance", s.variance}, {"histogram", name}};
        if (fig == 1) {
            const double drift = s.mean - seed_mean;
            p["drift_from_seed_mean"] = drift;
            p["within_0.25_drift"] = std::abs(drift) <= 0.25;
            fig1_ok = fig1_ok && std::abs(drift) <= 0.25;
        }
        if (reference_setting) {
            const double ref = reference[fig - 1][row][k];
            const bool ok = std::abs(s.mean - ref) <= 0.1;
            p["reference_mean"] = ref;
            p["within_0.1_of_reference"] = ok;
            if (fig != 1) fig23_ok = fig23_ok && ok;
        }
        return p;
    };

    // Figure 1: population propagation.
    {
        json rows = json::array();
        const PopulationOptions popt{false, c.threads};
        const std::uint64_t last = *std::max_element(n_values.begin(), n_values.end());
        for (std::size_t r = 0; r < seeds.size(); ++r) {
            const RandomStream stream = base.substream(1).substream(r);
            const double m = moments(seeds[r]).mean;
            json panels = json::array();
            PopulationState cur = initial_population(seeds[r], K, stream, popt);
            for (std::uint64_t g = 0;; ++g) {
                for (std::size_t k = 0; k < n_values.size(); ++k)
                    if (n_values[k] == g) panels.push_back(panel(1, r, k, cur.values, m));
                if (g == last) break;
                cur = next_generation(cur, c.kernel, stream.substream(g + 1), popt);
            }
            rows.push_back({{"seed", to_json(seeds[r])}, {"seed_mean", m}, {"panels", panels}});
        }
        figures.push_back({{"figure", 1}, {"method", "population"}, {"rows", rows}});
    }

    // Figures 2 and 3: truncated approximation without and with the
    // Bonferroni correction.
    json depths = json::object();
    for (int fig = 2; fig <= 3; ++fig) {
        json rows = json::array();
        ApproxOptions ao;
        ao.levels = fig == 3 ? fig3_levels : LevelSampling::explicit_draws;
        ao.guard_override = c.guard_override;
        ao.threads = c.threads;
        for (std::size_t r = 0; r < seeds.size(); ++r) {
            const auto sm = moments(seeds[r]);
            if (!sm.mean_defined || sm.variance_infinite)
                throw BudgetInapplicable("figure seeds need a finite mean and variance");
            json panels = json::array();
            for (std::size_t k = 0; k < n_values.size(); ++k) {
                TruncationBudget b = c.budget;
                b.n = n_values[k] == 0 ? std::optional<std::uint64_t>{1} : std::optional<std::uint64_t>{n_values[k]};
                b.v_F = sm.variance;
                b.v_G = vg.variance;
                b.bonferroni_K = fig == 3 ? std::optional<std::uint64_t>{K} : std::nullopt;
                const RandomStream stream = base.substream(static_cast<std::uint64_t>(fig)).substream(r).substream(k);
                const auto values = draw_approx(sm.mean, c.kernel, b, K, stream, ao);
                json p = panel(fig, r, k, values, sm.mean);
                p["depth"] = truncation_depth(b);
                depths["fig" + std::to_string(fig)] = truncation_depth(b);
                if (n_values[k] == 1 && seeds[r].family() != Family::normal) {
                    p["expected_mismatch"] = true;
                    if (exact_check) {
                        const auto exact = draw_exact(IterateSpec{seeds[r], c.kernel, 1}, K, stream.substream(1u << 20),
                                                      ExactOptions{26, false, c.threads});
                        p["ks_vs_exact"] = to_json(ks_two_sample(values, exact));
                    }
                }
                panels.push_back(p);
            }
            rows.push_back({{"seed", to_json(seeds[r])}, {"seed_mean", sm.mean}, {"panels", panels}});
        }
        figures.push_back({{"figure", fig},
                           {"method", "approximate"},
                           {"level_sampling", ao.levels == LevelSampling::closed_form ? "closed_form" : "explicit"},
                           {"rows", rows}});
    }

    json summary = {{"population_size", K},
                    {"kernel", to_json(c.kernel)},
                    {"n_values", n_values},
                    {"depths", depths},
                    {"log_base", c.budget.log_base == LogBase::natural ? "natural" : "base2"},
                    {"reference_setting", reference_setting},
                    {"figures", figures},
                    {"checks",
                     {{"fig1_drift_within_0.25", fig1_ok},
                      {"fig2_fig3_within_0.1_of_reference", reference_setting ? json(fig23_ok) : json(nullptr)}}}};
    art.emit_json("figures_summary.json", summary, false);
    return summary;
}

// Front end ---------------------------------------------------------------------

namespace {

using Converter = std::function<json(const std::string&)>;

json to_number(const std::string& s) { return parse_double(s); }
json to_uint(const std::string& s) { return parse_uint(s, "value"); }
json to_text(const std::string& s) { return s; }
json to_dist(const std::string& s) { return to_json(parse_distribution(s)); }

json to_grid(const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) throw InvalidInput("grid must be written delta:K, e.g. 0.05:200");
    return {{"delta", parse_double(s.substr(0, colon))}, {"k_grid", parse_uint(s.substr(colon + 1), "grid K")}};
}

json to_budget_n(const std::string& s) {
    if (s == "inf" || s == "infinity") return "inf";
    return parse_uint(s, "n");
}

json to_log_base(const std::string& s) {
    if (s == "natural" || s == "e" || s == "ln") return "natural";
    if (s == "base2" || s == "2") return "base2";
    throw InvalidInput("--log must be natural or base2");
}

json to_uint_list(const std::string& s) {
    json out = json::array();
    std::string_view rest = s;
    while (true) {
        const auto comma = rest.find(',');
        out.push_back(parse_uint(rest.substr(0, comma), "list entry"));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
    }
    return out;
}

json to_record(const std::string& s) {
    if (s == "all" || s == "last") return s;
    return to_uint_list(s);
}

class Binder {
public:
    explicit Binder(CLI::App* app) : app_(app) {}

    Binder& value(const std::string& names, const std::string& pointer, Converter conv, const std::string& help) {
        auto& b = bindings_.emplace_back();
        b.ptr = json::json_pointer(pointer);
        b.conv = std::move(conv);
        b.opt = app_->add_option(names, b.text, help);
        return *this;
    }

    Binder& flag(const std::string& names, const std::string& pointer, const std::string& help) {
        auto& b = bindings_.emplace_back();
        b.ptr = json::json_pointer(pointer);
        b.is_flag = true;
        b.opt = app_->add_flag(names, b.flag, help);
        return *this;
    }

    bool was_set(const std::string& pointer) const {
        for (const auto& b : bindings_)
            if (b.ptr.to_string() == pointer && b.opt->count() > 0) return true;
        return false;
    }

    void apply(json& j) const {
        for (const auto& b : bindings_) {
            if (b.opt->count() == 0) continue;
            j[b.ptr] = b.is_flag ? json(b.flag) : b.conv(b.text);
        }
    }

    CLI::App* app() const { return app_; }

private:
    struct Binding {
        std::string text;
        bool flag = false;
        bool is_flag = false;
        json::json_pointer ptr;
        Converter conv;
        CLI::Option* opt = nullptr;
    };
    CLI::App* app_;
    std::deque<Binding> bindings_;
};

struct Subcommand {
    std::string name;
    Command action;
    std::unique_ptr<Binder> binder;
    std::string config_path;
    std::string seed;
};

void add_common(Subcommand& s) {
    auto* app = s.binder->app();
    app->add_option("--config", s.config_path, "JSON config or run manifest");
    app->add_option("--seed", s.seed, "master seed (overrides QSO_SEED and the config)");
    s.binder->value("--out", "/output_dir", to_text, "output directory (default: primary artifact to stdout)")
        .value("--stream-id,--streams", "/stream_id", to_uint, "base stream id")
        .value("--threads", "/threads", to_uint, "worker threads (0: all)")
        .flag("--guard-override", "/guard_override", "allow draws above the feasibility guard");
}

void add_budget(Binder& b) {
    b.value("--alpha", "/budget/alpha", to_number, "error probability alpha")
        .value("--delta", "/budget/delta", to_number, "deviation delta")
        .value("--vf", "/budget/v_F", to_number, "seed variance v_F")
        .value("--vg", "/budget/v_G", to_number, "kernel variance v_G")
        .value("--log", "/budget/log_base", to_log_base, "log base of the depth formula: base2 or natural")
        .value("--bonferroni", "/budget/bonferroni_K", to_uint, "Bonferroni population size K");
}

// Applies the top-level members of `patch`; budget, grid and options merge
// key by key, everything else is replaced.
void overlay(json& base, const json& patch) {
    for (const auto& [k, v] : patch.items()) {
        if ((k == "budget" || k == "grid" || k == "options") && v.is_object() && base.contains(k) &&
            base[k].is_object()) {
            for (const auto& [kk, vv] : v.items()) base[k][kk] = vv;
        } else {
            base[k] = v;
        }
    }
}

std::uint64_t seed_from_text(const std::string& text, const std::string& what) {
    return parse_uint(text, what);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Simulation and numerical checks for centred quadratic stochastic operators", "qso"};
    app.require_subcommand(1);
    app.set_version_flag("--version", version());

    std::deque<Subcommand> subs;  // CLI11 keeps pointers into the elements
    auto make = [&](const std::string& name, const std::string& help, Command action) -> Binder& {
        subs.push_back(Subcommand{name, std::move(action), std::make_unique<Binder>(app.add_subcommand(name, help)), {}, {}});
        add_common(subs.back());
        return *subs.back().binder;
    };

    make("simulate-population", "population propagation with random mid-parent pairing", cmd_simulate_population)
        .value("--initial,--f", "/seed_distribution", to_dist, "initial law, e.g. exponential:1")
        .value("--kernel,--g", "/kernel", to_dist, "kernel law, e.g. normal:0,0.5")
        .value("--K", "/population_size", to_uint, "population size")
        .value("--n", "/n", to_uint, "generations")
        .value("--record", "/options/record", to_record, "generations to write: all, last, or a list 1,100,500")
        .flag("--forbid-self-pairing", "/options/forbid_self_pairing", "draw distinct parents");

    make("draw-exact", "exact draws from the n-th iterate", cmd_draw_exact)
        .value("--f", "/seed_distribution", to_dist, "seed law F")
        .value("--g", "/kernel", to_dist, "kernel law G")
        .value("--n", "/n", to_uint, "iteration count")
        .value("--count", "/count", to_uint, "number of values")
        .value("--format", "/options/format", to_text, "csv or json");

    {
        auto& b = make("draw-approx", "truncated approximate draws", cmd_draw_approx)
                      .value("--mean", "/options/seed_mean", to_number, "seed mean m")
                      .value("--f", "/seed_distribution", to_dist, "seed law (supplies m and v_F when not given)")
                      .value("--g", "/kernel", to_dist, "kernel law G")
                      .value("--n", "/budget/n", to_budget_n, "target iterate n (integer or inf)")
                      .value("--count", "/count", to_uint, "number of values")
                      .value("--levels", "/options/levels", to_text, "explicit or closed_form")
                      .value("--format", "/options/format", to_text, "csv or json");
        add_budget(b);
    }
    {
        auto& b = make("depth", "truncation depth N(alpha, delta, n)", cmd_depth)
                      .value("--n", "/budget/n", to_budget_n, "target iterate n (integer or inf)");
        add_budget(b);
    }
    make("cf-iterate", "characteristic function of the n-th iterate", cmd_cf_iterate)
        .value("--f", "/seed_distribution", to_dist, "seed law F")
        .value("--g", "/kernel", to_dist, "kernel law G")
        .value("--n", "/n", to_uint, "iteration count")
        .value("--grid", "/grid", to_grid, "grid delta:K");
    make("cf-limit", "limit product of the kernel", cmd_cf_limit)
        .value("--g,--kernel", "/kernel", to_dist, "kernel law G")
        .value("--grid", "/grid", to_grid, "grid delta:K")
        .value("--depth-cap", "/options/depth_cap", to_uint, "maximum number of factors")
        .value("--tol", "/options/tol", to_number, "increment tolerance")
        .value("--A", "/options/A", to_number, "tail bound constant A")
        .value("--p", "/options/p", to_number, "tail bound exponent p")
        .value("--s0", "/options/s0", to_number, "tail bound range s0");
    make("fixed-point", "fixed-point or dyadic-stability residual", cmd_fixed_point)
        .value("--candidate", "/options/candidate", to_dist, "candidate law")
        .value("--candidate-csv", "/options/candidate_csv", to_text, "candidate CF grid (s,re,im)")
        .value("--kernel,--g", "/kernel", to_dist, "kernel law G")
        .value("--grid", "/grid", to_grid, "grid delta:K")
        .value("--check", "/options/check", to_text, "fixed or dyadic");
    make("tail-check", "local log bound and log sandwich", cmd_tail_check)
        .value("--g,--kernel", "/kernel", to_dist, "kernel law G")
        .value("--grid", "/grid", to_grid, "grid delta:K")
        .value("--A", "/options/A", to_number, "bound constant A")
        .value("--p", "/options/p", to_number, "bound exponent p")
        .value("--s0", "/options/s0", to_number, "bound range s0")
        .value("--C", "/options/C", to_number, "power tail constant C (derives A)")
        .value("--epsilon", "/options/epsilon", to_number, "power tail exponent epsilon");
    make("stable-limit", "convergence of (phi(s/n))^n to exp(-C pi |s|)", cmd_stable_limit)
        .value("--dist,--g", "/kernel", to_dist, "law under test")
        .value("--C", "/options/C", to_number, "tail constant C (default: cauchy_like tail constant)")
        .value("--n-values", "/options/n_values", to_uint_list, "list of n, e.g. 1,2,4,8")
        .value("--grid", "/grid", to_grid, "grid delta:K");
    {
        auto& b = make("compare", "two-sample KS between exact and approximate draws, or two CSV files", cmd_compare)
                      .value("--f", "/seed_distribution", to_dist, "seed law F")
                      .value("--g", "/kernel", to_dist, "kernel law G")
                      .value("--n", "/n", to_uint, "iteration count of the exact draws")
                      .value("--budget-n", "/budget/n", to_budget_n, "n of the truncation budget")
                      .value("--count", "/count", to_uint, "values per sample")
                      .value("--levels", "/options/levels", to_text, "explicit or closed_form")
                      .value("--a", "/options/a_csv", to_text, "first sample CSV")
                      .value("--b", "/options/b_csv", to_text, "second sample CSV");
        add_budget(b);
    }
    make("replicate-figures", "population and approximate-sampler figure runs", cmd_replicate_figures)
        .value("--K", "/population_size", to_uint, "population size")
        .value("--g,--kernel", "/kernel", to_dist, "kernel law G")
        .value("--n-values", "/options/n_values", to_uint_list, "iterations to record")
        .value("--bins", "/options/bins", to_uint, "histogram bins")
        .value("--fig3-levels", "/options/fig3_levels", to_text, "explicit or closed_form")
        .value("--exact-check", "/options/exact_check", [](const std::string& s) -> json {
            if (s == "true" || s == "1") return true;
            if (s == "false" || s == "0") return false;
            throw InvalidInput("--exact-check takes true or false");
        }, "KS of the n = 1 mismatch panels against exact draws");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    Subcommand* chosen = nullptr;
    for (auto& s : subs)
        if (s.binder->app()->parsed()) chosen = &s;
    if (!chosen) {
        err << app.help();
        return 2;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        json j = to_json(chosen->name == "replicate-figures" ? figure_defaults() : ExperimentConfig{});
        if (!chosen->config_path.empty()) {
            std::ifstream f(chosen->config_path);
            if (!f) throw InvalidInput("cannot read config '" + chosen->config_path + "'");
            json file;
            try {
                file = json::parse(f);
            } catch (const json::parse_error& e) {
                throw InvalidInput(std::string("config is not valid JSON: ") + e.what());
            }
            if (!file.is_object()) throw InvalidInput("config must be a JSON object");
            overlay(j, file.contains("config") ? file.at("config") : file);
        }
        auto& binder = *chosen->binder;
        binder.apply(j);

        // A law given on the command line also supplies its variance to the
        // budget unless the variance was given explicitly.
        auto derive = [&](const char* dist_ptr, const char* var_ptr) {
            if (!binder.was_set(dist_ptr) || binder.was_set(var_ptr)) return;
            const auto m = moments(distribution_from_json(j[json::json_pointer(dist_ptr)]));
            if (!m.variance_infinite) j[json::json_pointer(var_ptr)] = m.variance;
        };
        derive("/seed_distribution", "/budget/v_F");
        derive("/kernel", "/budget/v_G");

        if (!chosen->seed.empty()) {
            j["master_seed"] = seed_from_text(chosen->seed, "--seed");
        } else if (const char* env = std::getenv("QSO_SEED"); env && *env) {
            j["master_seed"] = seed_from_text(env, "QSO_SEED");
        }
        j["command"] = chosen->name;

        const ExperimentConfig cfg = config_from_json(j);
        Artifacts art(chosen->name == "replicate-figures" ? std::string() : cfg.output_dir, out);
        const json report = chosen->action(cfg, art);

        if (!cfg.output_dir.empty()) {
            const double wall =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::vector<std::string> outputs = art.files();
            if (chosen->name == "replicate-figures") {
                for (const auto& fig : report.at("figures"))
                    for (const auto& row : fig.at("rows"))
                        for (const auto& p : row.at("panels")) outputs.push_back(p.at("histogram").get<std::string>());
                outputs.push_back("figures_summary.json");
            }
            const json manifest = {{"command", cfg.command},
                                   {"config", to_json(cfg)},
                                   {"master_seed", cfg.master_seed},
                                   {"version", version()},
                                   {"wall_time_seconds", wall},
                                   {"log_base", cfg.budget.log_base == LogBase::natural ? "natural" : "base2"},
                                   {"outputs", outputs},
                                   {"report", report}};
            const fs::path path = fs::path(cfg.output_dir) / "manifest.json";
            std::ofstream f(path, std::ios::binary);
            f << manifest.dump(2) << '\n';
            if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
        }
        if (chosen->name == "replicate-figures") out << report.at("checks").dump() << '\n';
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        if (const auto* fe = dynamic_cast<const FeasibilityError*>(&e))
            err << json{{"error", "feasibility"}, {"estimated_draws", fe->estimated_draws()}}.dump() << '\n';
        return 2;
    } catch (const NumericFailure& e) {
        err << json{{"error", "numeric_failure"}, {"message", e.what()}, {"residual", e.residual()}}.dump() << '\n';
        return 3;
    } catch (const json::exception& e) {
        err << "error: malformed config: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace qso
