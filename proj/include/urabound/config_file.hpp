// Flat key-value config files: `key = value` lines, '#' comments.
#ifndef URABOUND_CONFIG_FILE_HPP
#define URABOUND_CONFIG_FILE_HPP

#include <map>
#include <optional>
#include <string>

#include "urabound/bound.hpp"
#include "urabound/sysmodel.hpp"

namespace urabound::config {

class KeyValueFile {
  public:
    static KeyValueFile parse(const std::string& text);
    static KeyValueFile load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_uint(const std::string& key) const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

  private:
    std::map<std::string, std::string> entries_;
};

struct ResolvedConfig {
    sysmodel::SystemConfig system;
    bound::BoundOptions bound_opts;
    bool has_power = false;  // p or ebn0_db given (train/constants do not need one)
};

// Keys: ka, n, k, p | ebn0_db, p_prime | p_prime_ratio, eps_target, seed,
// variants.kernel, variants.idens, variants.q2_mass. Throws
// std::invalid_argument with a one-line reason on any inconsistency.
ResolvedConfig resolve_config(const KeyValueFile& kv);

}  // namespace urabound::config

#endif
