#pragma once

#include "vrcom/campaign.hpp"
#include "vrcom/controller.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace vrcom {

// Campaign outcome records. Doubles round-trip exactly (shortest-exact
// formatting), so re-reading a file reproduces the rows bit for bit.
std::string outcomes_to_csv(const std::vector<ScenarioOutcome>& outcomes);
std::vector<ScenarioOutcome> outcomes_from_csv(const std::string& text);
void write_outcomes_csv(const std::vector<ScenarioOutcome>& outcomes,
                        const std::filesystem::path& path);
std::vector<ScenarioOutcome> read_outcomes_csv(const std::filesystem::path& path);

std::string stats_to_json(const CampaignStats& stats, double critical_kw);
CampaignStats stats_from_json(const std::string& text, double* critical_kw = nullptr);
void write_stats_json(const CampaignStats& stats, double critical_kw,
                      const std::filesystem::path& path);

/// Per-cell statistic tables (average / std dev / max / min rows), plain text.
std::string format_stats_tables(const CampaignStats& stats);

/// Step-by-step trace of one regulation run.
std::string trace_to_csv(const RegulationOutcome& outcome);

/// Voltage profile per accepted step as an SVG line plot (one polyline per
/// accepted step plus the initial profile). Requires capture_profiles.
std::string profile_plot_svg(const RegulationOutcome& outcome, const MainBody& body,
                             double v_min, double v_max);

struct ReportFiles {
    std::filesystem::path outcomes_csv;
    std::filesystem::path stats_json;
    std::filesystem::path tables_txt;
};

/// Writes the standard report bundle for a campaign into outdir.
ReportFiles emit_report(const CampaignResult& result, const std::filesystem::path& outdir);

} // namespace vrcom
