#include "probesched/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace probesched {

namespace {
const char* sweep_variable_name(SweepVariable v) {
    switch (v) {
        case SweepVariable::users: return "users";
        case SweepVariable::beta: return "beta";
        case SweepVariable::n_slots: return "n_slots";
    }
    return "?";
}

std::string policy_label(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::jps_dynamic: return "jps_dynamic";
        case PolicyKind::jps_static: return "jps_static";
        case PolicyKind::jlps: return "jlps";
        case PolicyKind::round_robin: return "round_robin";
        case PolicyKind::genie_pf: return "genie_pf";
        case PolicyKind::probe_all_pf: return "probe_all_pf";
    }
    return "?";
}
}  // namespace

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_manifest(const std::filesystem::path& dir, const Manifest& manifest) {
    nlohmann::json j;
    j["command"] = manifest.command;
    j["config_hash"] = manifest.config_hash;
    j["seed"] = manifest.seed;
    j["tool_version"] = kToolVersion;
    j["outputs"] = manifest.outputs;
    j["duration_seconds"] = manifest.duration_seconds;
    write_text_file(dir / "manifest.json", j.dump(2) + "\n");
}

std::string thresholds_csv(const ThresholdTable& table) {
    std::ostringstream out;
    out << "j,v_j\n";
    for (std::size_t j = 0; j < table.thresholds.size(); ++j)
        out << j << "," << format_double(table.thresholds[j]) << "\n";
    return out.str();
}

std::string probe_probs_csv(std::span<const double> probs) {
    std::ostringstream out;
    out << "j,p_j\n";
    for (std::size_t j = 0; j < probs.size(); ++j)
        out << (j + 1) << "," << format_double(probs[j]) << "\n";
    return out.str();
}

std::string gain_curves_csv(std::span<const TheoryReport> reports) {
    std::ostringstream out;
    out << "K,gain_jps,gain_ga,gain_pa,gain_rr\n";
    for (const auto& r : reports) {
        out << r.user_count << "," << format_double(r.gain_jps) << ","
            << format_double(r.gain_ga) << "," << format_double(r.gain_pa) << ","
            << format_double(r.gain_rr) << "\n";
    }
    return out.str();
}

std::string throughput_traj_csv(const MetricsSeries& series) {
    std::ostringstream out;
    out << "slot,user,T\n";
    for (std::size_t i = 0; i < series.record_slots.size(); ++i) {
        for (std::size_t k = 0; k < series.throughput_traj[i].size(); ++k) {
            out << series.record_slots[i] << "," << (k + 1) << ","
                << format_double(series.throughput_traj[i][k]) << "\n";
        }
    }
    return out.str();
}

std::string utility_traj_csv(const MetricsSeries& series) {
    std::ostringstream out;
    out << "slot,utility\n";
    for (std::size_t i = 0; i < series.record_slots.size(); ++i)
        out << series.record_slots[i] << "," << format_double(series.utility_traj[i]) << "\n";
    return out.str();
}

std::string probe_hist_csv(std::span<const MetricsSeries> series) {
    std::size_t len = 0;
    for (const auto& s : series) len = std::max(len, s.probe_histogram.size());
    std::vector<std::int64_t> counts(len, 0);
    for (const auto& s : series)
        for (std::size_t j = 0; j < s.probe_histogram.size(); ++j)
            counts[j] += s.probe_histogram[j];
    std::ostringstream out;
    out << "J,count\n";
    for (std::size_t j = 0; j < counts.size(); ++j) out << j << "," << counts[j] << "\n";
    return out.str();
}

std::string selection_counts_csv(std::span<const MetricsSeries> series) {
    std::size_t users = series.empty() ? 0 : series.front().selection_counts.size();
    std::vector<std::int64_t> counts(users, 0);
    for (const auto& s : series)
        for (std::size_t k = 0; k < users; ++k) counts[k] += s.selection_counts[k];
    std::ostringstream out;
    out << "user,count\n";
    for (std::size_t k = 0; k < users; ++k) out << (k + 1) << "," << counts[k] << "\n";
    return out.str();
}

std::string sweep_csv(std::span<const SweepRow> rows, SweepVariable variable) {
    std::ostringstream out;
    out << "variable,value,policy,gain_mean,gain_std,kappa_mean,kappa_std,"
           "sum_throughput_mean,sum_throughput_std\n";
    for (const auto& row : rows) {
        out << sweep_variable_name(variable) << "," << format_double(row.value) << ","
            << policy_label(row.policy) << "," << format_double(row.report.gain_mean) << ","
            << format_double(row.report.gain_std) << "," << format_double(row.report.kappa_mean)
            << "," << format_double(row.report.kappa_std) << ","
            << format_double(row.report.sum_throughput_mean) << ","
            << format_double(row.report.sum_throughput_std) << "\n";
    }
    return out.str();
}

}  // namespace probesched
