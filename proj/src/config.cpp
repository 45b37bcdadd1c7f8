#include <fstream>
#include <sstream>

#include "csv.hpp"
#include "gammalab/error.hpp"
#include "gammalab/experiment.hpp"

namespace gammalab {

void Config::set(const std::string& key, const std::string& value)
{
    auto k = std::string(csv::trim(key));
    require(!k.empty(), ErrorKind::InvalidInput, "empty config key");
    values_[k] = std::string(csv::trim(value));
}

std::string Config::get(const std::string& key, const std::string& fallback) const
{
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const
{
    auto it = values_.find(key);
    return it == values_.end() ? fallback : csv::to_double(it->second, "config key '" + key + "'");
}

int Config::get_int(const std::string& key, int fallback) const
{
    auto it = values_.find(key);
    return it == values_.end() ? fallback : static_cast<int>(csv::to_long(it->second, "config key '" + key + "'"));
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const
{
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    std::vector<double> out;
    for (auto part : csv::split(it->second))
        out.push_back(csv::to_double(part, "config key '" + key + "'"));
    return out;
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) const
{
    auto it = values_.find(key);
    if (it == values_.end())
        return fallback;
    std::vector<int> out;
    for (auto part : csv::split(it->second))
        out.push_back(static_cast<int>(csv::to_long(part, "config key '" + key + "'")));
    return out;
}

std::string Config::canonical() const
{
    std::string out;
    for (const auto& [k, v] : values_)
        out += k + " = " + v + "\n";
    return out;
}

Config parse_config(const std::string& text)
{
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        auto hash = line.find('#');
        auto body = csv::trim(std::string_view(line).substr(0, hash));
        if (body.empty())
            continue;
        auto eq = body.find('=');
        require(eq != std::string_view::npos, ErrorKind::InvalidInput,
                "config line " + std::to_string(number) + ": expected key = value");
        cfg.set(std::string(body.substr(0, eq)), std::string(body.substr(eq + 1)));
    }
    return cfg;
}

Config load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace gammalab
