#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qso/analysis.hpp"
#include "qso/cf_engine.hpp"
#include "qso/distributions.hpp"
#include "qso/samplers.hpp"

namespace qso {

/// Shortest decimal representation that round-trips ("." separator,
/// locale independent). Non-finite values print as inf, -inf, nan.
std::string format_double(double v);

/// Strict decimal parse of a whole string; throws InvalidInput.
double parse_double(std::string_view text);

nlohmann::json to_json(const DistributionSpec& spec);
DistributionSpec distribution_from_json(const nlohmann::json& j);

/// `family:p1,p2,...`, e.g. normal:0,0.5, pointmass:2, cauchylike:0,1,2,
/// powerlaw:0.5, stable:1.5, exponential:1, empirical:1,2,3.
DistributionSpec parse_distribution(std::string_view text);
std::string to_mini_syntax(const DistributionSpec& spec);

std::string family_tag_alias(std::string_view tag);

void write_cf_csv(std::ostream& os, const CFGrid& grid);
CFGrid read_cf_csv(std::istream& is);

nlohmann::json to_json(const ResidualReport& r);
nlohmann::json to_json(const TailBoundReport& r);
nlohmann::json to_json(const StableLimitReport& r);
nlohmann::json to_json(const KernelLimitResult& r);
nlohmann::json to_json(const KSResult& r);
nlohmann::json to_json(const MomentSummary& m);

void write_values_csv(std::ostream& os, std::span<const double> values);
std::vector<double> read_values_csv(std::istream& is);
nlohmann::json values_to_json(std::span<const double> values);

void write_population_csv(std::ostream& os, std::span<const PopulationState> generations);
void write_histogram_csv(std::ostream& os, const Histogram& h);

nlohmann::json to_json(const TruncationBudget& b);
TruncationBudget budget_from_json(const nlohmann::json& j);

}  // namespace qso
