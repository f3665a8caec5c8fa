#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "kdelab/cli.hpp"

namespace kdelab::cli {

namespace {

std::string format_double(double v) {
    if (!std::isfinite(v)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    // keep floats recognizable as floats
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

void emit(const nlohmann::json& v, std::string& out, int depth) {
    const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(2 * depth), ' ');
    switch (v.type()) {
        case nlohmann::json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {  // std::map: sorted
                if (!first) out += ",\n";
                first = false;
                out += pad + nlohmann::json(it.key()).dump() + ": ";
                emit(it.value(), out, depth + 1);
            }
            out += "\n" + close + "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) out += ",\n";
                out += pad;
                emit(v[i], out, depth + 1);
            }
            out += "\n" + close + "]";
            return;
        }
        case nlohmann::json::value_t::number_float: out += format_double(v.get<double>()); return;
        default: out += v.dump(); return;
    }
}

}  // namespace

const std::vector<std::string>& subcommand_names() {
    static const std::vector<std::string> names{"check-conditions", "gen-field", "kde", "clt-run",
                                                "blocks", "moment-check", "fixed-m-gap"};
    return names;
}

std::string to_stable_json(const nlohmann::json& value) {
    std::string out;
    emit(value, out, 0);
    out += "\n";
    return out;
}

std::string csv_cell(const nlohmann::json& v) {
    switch (v.type()) {
        case nlohmann::json::value_t::null: return "";
        case nlohmann::json::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) return "";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", d);
            return buf;
        }
        case nlohmann::json::value_t::string: {
            const auto s = v.get<std::string>();
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char c : s) {
                if (c == '"') q += '"';
                q += c;
            }
            return q + "\"";
        }
        default: return v.dump();
    }
}

std::string CsvTable::render() const {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw std::logic_error("csv table " + name + ": row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_cell(row[i]);
        out += "\n";
    }
    return out;
}

const std::map<std::string, std::vector<std::string>>& csv_schemas() {
    static const std::map<std::string, std::vector<std::string>> schemas{
        {"check-conditions.conditions", {"condition", "verdict", "label"}},
        {"gen-field.full", {"i_1", "value"}},  // one index column per dimension
        {"gen-field.truncated", {"i_1", "value"}},
        {"kde.estimates", {"x", "fn", "fn_truncated", "p", "expected_fn", "sigma2"}},
        {"clt-run.summary",
         {"n", "m", "truncation_radius", "b", "x", "px", "sigma2", "site_variance", "ez", "ezeta", "mean",
          "variance", "variance_ratio", "skewness", "excess_kurtosis", "ks_distance", "ks_p_value",
          "remainder_second_moment", "remainder_variance", "max_identity_error", "verdict"}},
        {"clt-run.replicates", {"n", "x", "replicate", "t_n", "t_zeta", "t_remainder"}},
        {"blocks.points",
         {"n", "m", "block_side", "gap", "blocks_per_axis", "b", "covered_fraction", "rate_proxy", "gap_mean",
          "gap_variance", "adjacent_correlation", "correlation_threshold", "lag1_correlation",
          "lagm_correlation", "lf1", "lf1_target", "sigma2"}},
        {"blocks.lindeberg", {"n", "epsilon", "lf2", "trivially_zero"}},
        {"moment-check.rectangles", {"n", "sides", "zeta_norm", "remainder_norm", "remainder_constant"}},
        {"moment-check.wu",
         {"p", "samples", "truncation_radius", "moment", "constant", "standard_error", "expected_constant", "z",
          "verdict"}},
        {"fixed-m-gap.gaps",
         {"mode", "n", "m", "b", "gap", "gap_standard_error", "centered_gap", "exact_gap", "bound_proxy"}},
    };
    return schemas;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
    f.close();
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw std::invalid_argument("override '" + assignment + "' is not of the form key=value");
    }
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    nlohmann::json value;
    try {
        value = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error&) {
        value = text;
    }
    if (!doc.is_object()) doc = nlohmann::json::object();
    nlohmann::json* node = &doc;
    std::stringstream ss(path);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw std::invalid_argument("override '" + assignment + "' has an empty key segment");
        parts.push_back(part);
    }
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        auto& next = (*node)[parts[i]];
        if (!next.is_object()) next = nlohmann::json::object();
        node = &next;
    }
    (*node)[parts.back()] = std::move(value);
}

nlohmann::json effective_config(const nlohmann::json& document, const std::string& subcommand) {
    if (document.is_null()) return nlohmann::json::object();
    if (!document.is_object()) throw std::invalid_argument("config document must be a JSON object");
    const auto& names = subcommand_names();
    nlohmann::json eff = nlohmann::json::object();
    for (auto it = document.begin(); it != document.end(); ++it) {
        if (std::find(names.begin(), names.end(), it.key()) == names.end()) eff[it.key()] = it.value();
    }
    if (document.contains(subcommand)) {
        const auto& section = document.at(subcommand);
        if (!section.is_object()) throw std::invalid_argument(subcommand + ": section must be an object");
        eff.merge_patch(section);
    }
    return eff;
}

std::filesystem::path resolve_out_dir(const RunOptions& options) {
    if (options.out_dir) return *options.out_dir;
    if (const char* env = std::getenv("KDELAB_OUT_DIR"); env && *env) return env;
    return "kdelab-out";
}

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j{{"schema_version", kReportSchema},
                     {"subcommand", subcommand},
                     {"tool_version", version},
                     {"document", document},
                     {"config", config},
                     {"overrides", overrides},
                     {"started", started},
                     {"finished", finished},
                     {"threads", threads},
                     {"outputs", outputs},
                     {"verdicts", verdicts},
                     {"status", status},
                     {"exit_code", exit_code}};
    j["seed"] = seed ? nlohmann::json(*seed) : nlohmann::json(nullptr);
    j["error"] = error.empty() ? nlohmann::json(nullptr) : nlohmann::json(error);
    return j;
}

}  // namespace kdelab::cli
