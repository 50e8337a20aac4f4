#include "urabound/config_file.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace urabound::config {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key or value");
        kv.entries_[key] = value;
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("cannot read config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void KeyValueFile::set(const std::string& key, const std::string& value) {
    entries_[key] = value;
}

bool KeyValueFile::has(const std::string& key) const { return entries_.count(key) > 0; }

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

double KeyValueFile::get_double(const std::string& key) const {
    const auto v = get(key);
    if (!v) throw std::invalid_argument("config: missing key '" + key + "'");
    std::size_t pos = 0;
    double d;
    try {
        d = std::stod(*v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' is not a number");
    }
    if (pos != v->size())
        throw std::invalid_argument("config: key '" + key + "' is not a number");
    return d;
}

std::uint64_t KeyValueFile::get_uint(const std::string& key) const {
    const auto v = get(key);
    if (!v) throw std::invalid_argument("config: missing key '" + key + "'");
    std::size_t pos = 0;
    unsigned long long u;
    try {
        u = std::stoull(*v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' is not an integer");
    }
    if (pos != v->size())
        throw std::invalid_argument("config: key '" + key + "' is not an integer");
    return u;
}

ResolvedConfig resolve_config(const KeyValueFile& kv) {
    ResolvedConfig rc;
    auto& sys = rc.system;
    sys.ka = static_cast<std::uint32_t>(kv.get_uint("ka"));
    sys.n = static_cast<std::uint32_t>(kv.get_uint("n"));
    sys.k = static_cast<std::uint32_t>(kv.get_uint("k"));
    if (kv.has("eps_target")) sys.eps_target = kv.get_double("eps_target");
    if (kv.has("seed")) sys.seed = kv.get_uint("seed");

    if (kv.has("p") && kv.has("ebn0_db"))
        throw std::invalid_argument("config: give either p or ebn0_db, not both");
    if (kv.has("p")) {
        sys.p = kv.get_double("p");
        rc.has_power = true;
    } else if (kv.has("ebn0_db")) {
        sys.p = sysmodel::ebn0_db_to_power(kv.get_double("ebn0_db"), sys.n, sys.k);
        rc.has_power = true;
    }

    if (kv.has("p_prime") && kv.has("p_prime_ratio"))
        throw std::invalid_argument("config: give either p_prime or p_prime_ratio, not both");
    if (kv.has("p_prime")) {
        sys.p_prime = kv.get_double("p_prime");
    } else {
        const double ratio = kv.has("p_prime_ratio") ? kv.get_double("p_prime_ratio") : 0.9;
        if (!(ratio > 0.0) || !(ratio < 1.0))
            throw std::invalid_argument("config: p_prime_ratio must be in (0,1)");
        sys.p_prime = ratio * sys.p;
    }

    if (const auto v = kv.get("variants.kernel")) {
        if (*v == "split") rc.bound_opts.kernel = bound::PairwiseKernel::Split;
        else if (*v == "gaussavg") rc.bound_opts.kernel = bound::PairwiseKernel::GaussianAverage;
        else if (*v == "baseline") rc.bound_opts.kernel = bound::PairwiseKernel::Baseline;
        else throw std::invalid_argument("config: variants.kernel must be split|gaussavg|baseline");
    }
    if (const auto v = kv.get("variants.idens")) {
        if (*v == "raw") rc.bound_opts.idens = bound::InfoDensityVariant::Raw;
        else if (*v == "canonical") rc.bound_opts.idens = bound::InfoDensityVariant::Canonical;
        else throw std::invalid_argument("config: variants.idens must be raw|canonical");
    }
    if (const auto v = kv.get("variants.q2_mass")) {
        if (*v == "product") rc.bound_opts.q2_mass = bound::Q2MassForm::Product;
        else if (*v == "half") rc.bound_opts.q2_mass = bound::Q2MassForm::Half;
        else throw std::invalid_argument("config: variants.q2_mass must be product|half");
    }
    return rc;
}

}  // namespace urabound::config
