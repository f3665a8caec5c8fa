#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace kdelab::cli {

inline constexpr const char* kReportSchema = "kdelab-report/1";
inline constexpr const char* kCsvSchema = "kdelab-csv/1";

[[nodiscard]] const std::vector<std::string>& subcommand_names();

// ---------------------------------------------------------------------------
// Serialization

/// Sorted keys, two-space indent, doubles with 17 significant digits,
/// non-finite numbers as null. Ends with a newline.
[[nodiscard]] std::string to_stable_json(const nlohmann::json& value);

/// One CSV cell: integers verbatim, doubles as %.17g, non-finite and null as
/// empty, strings quoted only when needed.
[[nodiscard]] std::string csv_cell(const nlohmann::json& value);

struct CsvTable {
    std::string name;  ///< file suffix: <subcommand>.<name>.csv
    std::vector<std::string> header;
    std::vector<std::vector<nlohmann::json>> rows;

    [[nodiscard]] std::string render() const;
};

/// Documented header of every table, by "<subcommand>.<name>".
[[nodiscard]] const std::map<std::string, std::vector<std::string>>& csv_schemas();

/// Writes the whole file or throws std::runtime_error naming the path.
void write_file(const std::filesystem::path& path, const std::string& content);

// ---------------------------------------------------------------------------
// Configuration

/// Sets a dotted path ("a.b.c=value"); the value is parsed as JSON and kept
/// as a string when it does not parse.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Top-level keys that are not subcommand sections, patched with the
/// section of `subcommand`.
[[nodiscard]] nlohmann::json effective_config(const nlohmann::json& document, const std::string& subcommand);

struct RunOptions {
    std::optional<std::string> config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out_dir;
    std::string format = "json";
};

/// --out, else $KDELAB_OUT_DIR, else ./kdelab-out.
[[nodiscard]] std::filesystem::path resolve_out_dir(const RunOptions& options);

// ---------------------------------------------------------------------------
// Running

struct RunManifest {
    std::string subcommand;
    std::string version;
    nlohmann::json document;   ///< config file after subcommand-section overrides
    nlohmann::json config;     ///< resolved config of the subcommand
    std::vector<std::string> overrides;
    std::string started;
    std::string finished;
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::vector<std::string> outputs;
    std::map<std::string, std::string> verdicts;
    std::string status;        ///< "ok", "verdict-fail" or "error"
    std::string error;
    int exit_code = 0;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Runs one subcommand; returns 0 (complete/pass), 2 (verdict fail) or 1
/// (error). Writes <out>/<subcommand>.manifest.json in every case where the
/// output directory is usable.
int run_subcommand(const std::string& name, const RunOptions& options, std::ostream& out, std::ostream& err);

/// Full command line, argv[0] included.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kdelab::cli
