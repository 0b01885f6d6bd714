#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "probesched/analysis.hpp"
#include "probesched/sim.hpp"

namespace probesched {

inline constexpr const char* kToolVersion = "0.1.0";

// deterministic float formatting shared by all CSV output
std::string format_double(double v);

struct Manifest {
    std::string command;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;  // paths relative to the manifest
    double duration_seconds = 0.0;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);
void write_manifest(const std::filesystem::path& dir, const Manifest& manifest);

std::string thresholds_csv(const ThresholdTable& table);
std::string probe_probs_csv(std::span<const double> probs);
std::string gain_curves_csv(std::span<const TheoryReport> reports);
std::string throughput_traj_csv(const MetricsSeries& series);
std::string utility_traj_csv(const MetricsSeries& series);
std::string probe_hist_csv(std::span<const MetricsSeries> series);
std::string selection_counts_csv(std::span<const MetricsSeries> series);
std::string sweep_csv(std::span<const SweepRow> rows, SweepVariable variable);

}  // namespace probesched
