#pragma once

#include <map>
#include <string>
#include <vector>

namespace gammalab {

// Flat "key = value" configuration; '#' starts a comment, lists are comma separated.
class Config {
public:
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const { return values_.count(key) != 0; }
    const std::map<std::string, std::string>& values() const { return values_; }

    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;

    // Canonical "key = value" lines in key order.
    std::string canonical() const;

private:
    std::map<std::string, std::string> values_;
};

Config parse_config(const std::string& text);
Config load_config(const std::string& path);

const std::vector<std::string>& experiment_names();

struct RunResult {
    int exit_code = 0;
    std::string message;
    std::vector<std::string> outputs;
};

// Runs one subcommand, writes its CSV files and manifest.json into out_dir.
// Exit codes: 0 success, 1 usage error, 2 contract violation.
RunResult run_experiment(const std::string& subcommand, const Config& config, const std::string& out_dir);

const char* library_version();

}  // namespace gammalab
