#include "tanglesim/config.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tanglesim {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void bad_value(const std::string& path, const std::string& value) {
    throw ConfigError("config: invalid value '" + value + "' for " + path);
}

double to_double(const std::string& path, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) {
            bad_value(path, value);
        }
        return v;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        bad_value(path, value);
    }
}

long long to_int(const std::string& path, const std::string& value) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        bad_value(path, value);
    }
    return v;
}

bool to_bool(const std::string& path, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "0" || value == "no") {
        return false;
    }
    bad_value(path, value);
}

net::DistFamily to_family(const std::string& path, const std::string& value) {
    if (value == "lognormal") {
        return net::DistFamily::LogNormal;
    }
    if (value == "constant") {
        return net::DistFamily::Constant;
    }
    if (value == "exponential") {
        return net::DistFamily::Exponential;
    }
    bad_value(path, value);
}

void apply_class_key(net::ClassParams& params, const std::string& section,
                     const std::string& key, const std::string& value) {
    const std::string path = section + "." + key;
    if (key == "tip_family") {
        params.tip.family = to_family(path, value);
    } else if (key == "tip_median_s") {
        params.tip.scale = to_double(path, value);
    } else if (key == "tip_sigma") {
        params.tip.sigma = to_double(path, value);
    } else if (key == "pow_family") {
        params.pow.family = to_family(path, value);
    } else if (key == "pow_median_s") {
        params.pow.scale = to_double(path, value);
    } else if (key == "pow_sigma") {
        params.pow.sigma = to_double(path, value);
    } else if (key == "failure_prob") {
        params.failure_prob = to_double(path, value);
    } else if (key == "workers") {
        params.workers = static_cast<int>(to_int(path, value));
    } else {
        throw ConfigError("config: unknown key " + path);
    }
}

void apply_key(ScenarioConfig& config, const std::string& section, const std::string& key,
               const std::string& value) {
    const std::string path = section + "." + key;
    if (section == "scenario") {
        if (key == "bus_count") {
            config.bus_count = static_cast<int>(to_int(path, value));
        } else if (key == "duration_s") {
            config.duration = to_double(path, value);
        } else if (key == "policy") {
            const auto policy = client::policy_from_name(value);
            if (!policy) {
                bad_value(path, value);
            }
            config.policy = *policy;
        } else if (key == "replications") {
            config.replications = static_cast<int>(to_int(path, value));
        } else if (key == "seed") {
            config.seed = static_cast<std::uint64_t>(to_int(path, value));
        } else if (key == "trace") {
            config.trace = value;
        } else if (key == "milestone_period_s") {
            config.milestone_period = to_double(path, value);
        } else if (key == "publish_rate_per_hour") {
            config.publish_rate_per_hour = to_double(path, value);
        } else if (key == "ledger_dump") {
            config.ledger_dump = value;
        } else {
            throw ConfigError("config: unknown key " + path);
        }
    } else if (section == "pool") {
        net::PoolConfig& pool = config.pool;
        if (key == "size") {
            pool.size = static_cast<int>(to_int(path, value));
        } else if (key == "good_fraction") {
            pool.good_fraction = to_double(path, value);
        } else if (key == "mediocre_fraction") {
            pool.mediocre_fraction = to_double(path, value);
        } else if (key == "bad_fraction") {
            pool.bad_fraction = to_double(path, value);
        } else if (key == "sync_fraction") {
            pool.sync_fraction = to_double(path, value);
        } else if (key == "remote_pow_fraction") {
            pool.remote_pow_fraction = to_double(path, value);
        } else if (key == "failure_load_factor") {
            pool.failure_load_factor = to_double(path, value);
        } else if (key == "service_scale") {
            pool.service_scale = to_double(path, value);
        } else if (key == "node_jitter") {
            pool.node_jitter = to_double(path, value);
        } else if (key == "rtt_min_s") {
            pool.rtt_min = to_double(path, value);
        } else if (key == "rtt_max_s") {
            pool.rtt_max = to_double(path, value);
        } else {
            throw ConfigError("config: unknown key " + path);
        }
    } else if (section == "class.good") {
        apply_class_key(config.pool.good, section, key, value);
    } else if (section == "class.mediocre") {
        apply_class_key(config.pool.mediocre, section, key, value);
    } else if (section == "class.bad") {
        apply_class_key(config.pool.bad, section, key, value);
    } else if (section == "estimator") {
        EstimatorConfig& est = config.estimator;
        if (key == "alpha") {
            est.alpha = to_double(path, value);
        } else if (key == "beta") {
            est.beta = to_double(path, value);
        } else if (key == "shared") {
            est.shared = to_bool(path, value);
        } else if (key == "failure_penalty_s") {
            est.failure_penalty = to_double(path, value);
        } else if (key == "min_known") {
            est.min_known = static_cast<int>(to_int(path, value));
        } else if (key == "busy_scope") {
            if (value == "per-bus" || value == "per_bus") {
                est.busy_scope = BusyScope::PerBus;
            } else if (value == "global") {
                est.busy_scope = BusyScope::Global;
            } else {
                bad_value(path, value);
            }
        } else {
            throw ConfigError("config: unknown key " + path);
        }
    } else {
        throw ConfigError("config: unknown section [" + section + "]");
    }
}

ScenarioConfig parse_stream(std::istream& in) {
    ScenarioConfig config;
    std::string section = "scenario";
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string text = trim(line);
        if (text.empty()) {
            continue;
        }
        if (text.front() == '[') {
            if (text.back() != ']') {
                throw ConfigError("config: malformed section header at line " +
                                  std::to_string(line_no));
            }
            section = trim(text.substr(1, text.size() - 2));
            continue;
        }
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: expected 'key = value' at line " +
                              std::to_string(line_no));
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config: empty key at line " + std::to_string(line_no));
        }
        apply_key(config, section, key, value);
    }
    return config;
}

void check(bool ok, const std::string& message) {
    if (!ok) {
        throw ConfigError("config: " + message);
    }
}

void validate_class(const std::string& section, const net::ClassParams& params) {
    check(params.tip.scale > 0.0, section + ".tip_median_s must be > 0");
    check(params.pow.scale > 0.0, section + ".pow_median_s must be > 0");
    check(params.tip.sigma >= 0.0, section + ".tip_sigma must be >= 0");
    check(params.pow.sigma >= 0.0, section + ".pow_sigma must be >= 0");
    check(params.failure_prob >= 0.0 && params.failure_prob <= 1.0,
          section + ".failure_prob must be within [0, 1]");
    check(params.workers >= 1, section + ".workers must be >= 1");
}

} // namespace

ScenarioConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config: cannot open " + path);
    }
    return parse_stream(in);
}

ScenarioConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_stream(in);
}

void validate(const ScenarioConfig& config) {
    check(config.bus_count >= 0, "scenario.bus_count must be >= 0");
    check(config.duration > 0.0, "scenario.duration_s must be > 0");
    check(config.replications >= 1, "scenario.replications must be >= 1");
    check(config.milestone_period > 0.0, "scenario.milestone_period_s must be > 0");
    check(config.publish_rate_per_hour > 0.0, "scenario.publish_rate_per_hour must be > 0");
    check(!config.trace.empty(), "scenario.trace must be set");
    if (config.trace != "synthetic") {
        check(std::filesystem::exists(config.trace),
              "scenario.trace file not found: " + config.trace);
    }

    const net::PoolConfig& pool = config.pool;
    check(pool.size >= 1, "pool.size must be >= 1");
    check(pool.good_fraction >= 0.0 && pool.mediocre_fraction >= 0.0 &&
              pool.bad_fraction >= 0.0,
          "pool class fractions must be >= 0");
    check(std::abs(pool.good_fraction + pool.mediocre_fraction + pool.bad_fraction - 1.0) <=
              1e-9,
          "pool class fractions must sum to 1");
    check(pool.sync_fraction >= 0.0 && pool.sync_fraction <= 1.0,
          "pool.sync_fraction must be within [0, 1]");
    check(pool.remote_pow_fraction >= 0.0 && pool.remote_pow_fraction <= 1.0,
          "pool.remote_pow_fraction must be within [0, 1]");
    check(pool.failure_load_factor >= 0.0, "pool.failure_load_factor must be >= 0");
    check(pool.service_scale > 0.0, "pool.service_scale must be > 0");
    check(pool.node_jitter >= 0.0 && pool.node_jitter < 1.0,
          "pool.node_jitter must be within [0, 1)");
    check(pool.rtt_min > 0.0 && pool.rtt_max >= pool.rtt_min,
          "pool rtt range must satisfy 0 < rtt_min_s <= rtt_max_s");
    validate_class("class.good", pool.good);
    validate_class("class.mediocre", pool.mediocre);
    validate_class("class.bad", pool.bad);

    const EstimatorConfig& est = config.estimator;
    check(est.alpha > 0.0 && est.alpha <= 1.0, "estimator.alpha must be within (0, 1]");
    check(est.beta > 0.0 && est.beta <= 1.0, "estimator.beta must be within (0, 1]");
    check(est.failure_penalty > 0.0, "estimator.failure_penalty_s must be > 0");
    check(est.min_known >= 0, "estimator.min_known must be >= 0");
}

} // namespace tanglesim
