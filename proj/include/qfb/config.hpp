#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "qfb/errors.hpp"

namespace qfb {

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline bool valid_key(const std::string& k)
{
    if (k.empty() || k.front() == '.' || k.back() == '.') return false;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const char c = k[i];
        const bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-'
                        || (c == '.' && k[i - 1] != '.');
        if (!ok) return false;
    }
    return true;
}

} // namespace detail

/*!
 * Flat `key = value` text with dotted keys, `#` comments and comma lists.
 * Typed getters raise ParseError for malformed values; reject_unknown
 * enforces a scenario's key set.
 */
class ConfigFile {
public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    static ConfigFile parse(std::istream& is)
    {
        ConfigFile c;
        std::string raw;
        int line = 0;
        while (std::getline(is, raw)) {
            ++line;
            if (const auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
            const std::string s = detail::trim(raw);
            if (s.empty()) continue;
            const auto eq = s.find('=');
            if (eq == std::string::npos) raise(Errc::ParseError, "line " + std::to_string(line) + ": expected key = value");
            const std::string key = detail::trim(std::string_view(s).substr(0, eq));
            const std::string val = detail::trim(std::string_view(s).substr(eq + 1));
            if (!detail::valid_key(key))
                raise(Errc::ParseError, "line " + std::to_string(line) + ", key '" + key + "': malformed key");
            if (val.empty())
                raise(Errc::ParseError, "line " + std::to_string(line) + ", key '" + key + "': empty value");
            if (c.entries_.count(key))
                raise(Errc::ParseError, "line " + std::to_string(line) + ", key '" + key + "': duplicate key");
            c.entries_[key] = {val, line};
        }
        return c;
    }

    static ConfigFile parse(const std::string& text)
    {
        std::istringstream is(text);
        return parse(is);
    }

    static ConfigFile load(const std::filesystem::path& p)
    {
        std::ifstream f(p);
        require(f.good(), Errc::IoError, "cannot open config file " + p.string());
        return parse(f);
    }

    bool has(const std::string& k) const { return entries_.count(k) > 0; }
    void set(const std::string& k, const std::string& v) { entries_[k] = {v, 0}; }
    const std::map<std::string, Entry>& entries() const { return entries_; }

    std::string text(const std::string& k) const { return get(k).value; }
    std::string text_or(const std::string& k, const std::string& d) const { return has(k) ? text(k) : d; }

    double number(const std::string& k) const { return to_number(k, get(k).value); }
    double number_or(const std::string& k, double d) const { return has(k) ? number(k) : d; }
    std::optional<double> maybe_number(const std::string& k) const
    {
        return has(k) ? std::optional<double>(number(k)) : std::nullopt;
    }

    std::uint64_t integer(const std::string& k) const
    {
        const auto& e = get(k);
        std::uint64_t v = 0;
        const auto* end = e.value.data() + e.value.size();
        const auto r = std::from_chars(e.value.data(), end, v);
        if (r.ec != std::errc{} || r.ptr != end) fail(k, "expected a non-negative integer, got '" + e.value + "'");
        return v;
    }
    std::uint64_t integer_or(const std::string& k, std::uint64_t d) const { return has(k) ? integer(k) : d; }

    bool boolean(const std::string& k) const
    {
        const auto& v = get(k).value;
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        fail(k, "expected true or false, got '" + v + "'");
    }
    bool boolean_or(const std::string& k, bool d) const { return has(k) ? boolean(k) : d; }

    std::vector<std::string> words(const std::string& k) const
    {
        std::vector<std::string> out;
        std::stringstream ss(get(k).value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = detail::trim(item);
            if (item.empty()) fail(k, "empty list element");
            out.push_back(item);
        }
        return out;
    }
    std::vector<double> numbers(const std::string& k) const
    {
        std::vector<double> out;
        for (const auto& w : words(k)) out.push_back(to_number(k, w));
        return out;
    }
    template <std::size_t N>
    std::array<double, N> vec(const std::string& k) const
    {
        const auto v = numbers(k);
        if (v.size() != N) fail(k, "expected " + std::to_string(N) + " comma-separated numbers");
        std::array<double, N> a{};
        std::copy(v.begin(), v.end(), a.begin());
        return a;
    }
    template <std::size_t N>
    std::array<double, N> vec_or(const std::string& k, std::array<double, N> d) const
    {
        return has(k) ? vec<N>(k) : d;
    }

    /// ParseError for the first key outside `allowed`.
    void reject_unknown(const std::set<std::string>& allowed) const
    {
        for (const auto& [k, e] : entries_)
            if (!allowed.count(k))
                raise(Errc::ParseError, "line " + std::to_string(e.line) + ", key '" + k + "': unknown key");
    }

    /// Sorted `key = value` lines; stable input for hashing.
    std::string canonical() const
    {
        std::string s;
        for (const auto& [k, e] : entries_) s += k + " = " + e.value + "\n";
        return s;
    }

    [[noreturn]] void fail(const std::string& k, const std::string& why) const
    {
        const auto it = entries_.find(k);
        const std::string where = it != entries_.end() && it->second.line > 0
                                      ? "line " + std::to_string(it->second.line) + ", "
                                      : std::string{};
        raise(Errc::ParseError, where + "key '" + k + "': " + why);
    }

private:
    const Entry& get(const std::string& k) const
    {
        const auto it = entries_.find(k);
        if (it == entries_.end()) raise(Errc::ValidationError, "key '" + k + "': required key is missing");
        return it->second;
    }

    double to_number(const std::string& k, const std::string& s) const
    {
        double v = 0;
        const auto* end = s.data() + s.size();
        const auto r = std::from_chars(s.data(), end, v);
        if (r.ec != std::errc{} || r.ptr != end) fail(k, "expected a number, got '" + s + "'");
        return v;
    }

    std::map<std::string, Entry> entries_;
};

/// ValidationError naming the key and the violated constraint.
inline void check(bool cond, const std::string& key, const std::string& constraint)
{
    if (!cond) raise(Errc::ValidationError, "key '" + key + "': " + constraint);
}

} // namespace qfb
