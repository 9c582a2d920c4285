#pragma once

// Flat `key = value` text files with `#` comments. Used for configs,
// manifests and machine descriptions.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "qtsc/error.hpp"

namespace qtsc {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

class KeyValues {
public:
    static KeyValues parse(std::istream& is, const std::string& origin = "<stream>") {
        KeyValues kv;
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string t = trim(line);
            if (t.empty()) continue;
            const auto eq = t.find('=');
            if (eq == std::string::npos)
                throw DataError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
            kv.add(trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1)));
        }
        return kv;
    }

    static KeyValues load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open '" + path + "'");
        return parse(in, path);
    }

    void add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }

    void set(const std::string& key, std::string value) {
        auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
        if (it == entries_.end())
            add(key, std::move(value));
        else
            it->second = std::move(value);
    }

    template <class T>
    void set(const std::string& key, const T& value) {
        if constexpr (std::is_floating_point_v<T>) {
            char buf[64];
            const auto res = std::to_chars(buf, buf + sizeof buf, static_cast<double>(value));
            set(key, std::string(buf, res.ptr));
            return;
        }
        std::ostringstream os;
        os.precision(17);
        os << value;
        set(key, os.str());
    }

    bool has(const std::string& key) const {
        return std::any_of(entries_.begin(), entries_.end(), [&](const auto& e) { return e.first == key; });
    }

    /// Last value for `key`.
    const std::string& raw(const std::string& key) const {
        for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
            if (it->first == key) return it->second;
        throw DataError("missing key '" + key + "'");
    }

    std::vector<std::string> all(const std::string& key) const {
        std::vector<std::string> out;
        for (const auto& e : entries_)
            if (e.first == key) out.push_back(e.second);
        return out;
    }

    template <class T>
    T get(const std::string& key) const {
        return convert<T>(key, raw(key));
    }

    template <class T>
    T get_or(const std::string& key, T fallback) const {
        return has(key) ? get<T>(key) : fallback;
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

    void write(std::ostream& os) const {
        for (const auto& [k, v] : entries_) os << k << " = " << v << '\n';
    }

    void save(const std::string& path, const std::string& header = {}) const {
        std::ofstream out(path);
        if (!out) throw DataError("cannot write '" + path + "'");
        if (!header.empty()) out << "# " << header << '\n';
        write(out);
    }

private:
    template <class T>
    static T convert(const std::string& key, const std::string& v) {
        if constexpr (std::is_same_v<T, std::string>) {
            return v;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
            if (v == "0" || v == "false" || v == "off" || v == "no") return false;
            throw DataError("key '" + key + "': expected a boolean, got '" + v + "'");
        } else if constexpr (std::is_floating_point_v<T>) {
            try {
                std::size_t pos = 0;
                const double d = std::stod(v, &pos);
                if (pos != v.size()) throw std::invalid_argument(v);
                return static_cast<T>(d);
            } catch (const std::exception&) {
                throw DataError("key '" + key + "': expected a number, got '" + v + "'");
            }
        } else {
            T out{};
            const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (ec != std::errc{} || p != v.data() + v.size())
                throw DataError("key '" + key + "': expected an integer, got '" + v + "'");
            return out;
        }
    }

    std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace qtsc
