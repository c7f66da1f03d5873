#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qsearch/types.hpp"

namespace qsearch {

// Flat "key = value" configuration with '#' comments.  Keeps insertion
// order so output headers can echo the configuration verbatim.
class ScenarioConfig {
public:
    static ScenarioConfig from_file(const std::string& path);
    static ScenarioConfig from_string(const std::string& text);

    bool has(const std::string& key) const;
    std::string get(const std::string& key) const;  // throws when missing
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    double require_double(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    long get_long(const std::string& key, long fallback) const;
    std::vector<int> get_int_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);

    // Canonical "key = value" lines in insertion order.
    std::string render() const;

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::pair<std::string, std::string>* find(const std::string& key);
    const std::pair<std::string, std::string>* find(const std::string& key) const;
};

// Commands return process exit codes: 0 success, 1 usage/config error,
// 2 numerical failure.  Human-readable summaries go to `info`.
int cmd_analytic(const ScenarioConfig& cfg, const std::string& out_path,
                 std::ostream& info);
int cmd_simulate(const ScenarioConfig& cfg, const std::string& out_path,
                 std::ostream& info);
int cmd_error_scan(const ScenarioConfig& cfg, const std::string& out_path,
                   std::ostream& info);
int cmd_optimize(const ScenarioConfig& cfg, const std::string& out_path,
                 std::ostream& info);
int cmd_reduce(const ScenarioConfig& cfg, const std::string& out_path,
               std::ostream& info);

// Shortest round-trippable decimal rendering used in all CSV output.
std::string format_value(double v);

}  // namespace qsearch
