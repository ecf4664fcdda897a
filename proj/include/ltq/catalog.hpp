#pragma once

// Curve catalogs: the built-ins plus user entries from a JSON document of the
// form [{"label": ..., "N": ..., "D": ..., "coeffs": [c0, ..., c6]}, ...]
// (a top-level {"curves": [...]} object is accepted as well).

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltq/curve.hpp"

namespace ltq {

class catalog {
public:
    catalog() : curves_(builtin_curves()) {}

    const std::vector<curve_spec>& curves() const { return curves_; }

    const curve_spec& find(const std::string& label) const {
        for (const auto& c : curves_)
            if (c.label == label) return c;
        throw error(errc::invalid_argument, "unknown curve " + label);
    }

    bool contains(const std::string& label) const {
        return std::any_of(curves_.begin(), curves_.end(), [&](const curve_spec& c) { return c.label == label; });
    }

    void add(const curve_spec& c) {
        validate(c);
        if (contains(c.label)) throw error(errc::invalid_argument, "duplicate curve label " + c.label);
        curves_.push_back(c);
    }

private:
    std::vector<curve_spec> curves_;
};

namespace detail {

inline std::string line_context(const std::string& text, std::size_t byte) {
    std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + std::min(byte, text.size()), '\n'));
    return "line " + std::to_string(line);
}

template <class T>
T json_field(const nlohmann::json& e, const char* name, std::size_t index) {
    const std::string where = "entry " + std::to_string(index) + ", field " + name;
    if (!e.contains(name)) throw error(errc::parse_error, where + ": missing");
    try {
        return e.at(name).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw error(errc::parse_error, where + ": wrong type");
    }
}

}  // namespace detail

/// Built-ins merged with the entries of `text`; an empty document yields the built-ins.
inline catalog parse_catalog(const std::string& text) {
    catalog cat;
    if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); })) return cat;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw error(errc::parse_error, "catalog: " + detail::line_context(text, e.byte) + ": " + e.what());
    }
    if (doc.is_object() && doc.contains("curves")) doc = doc["curves"];
    if (!doc.is_array()) throw error(errc::parse_error, "catalog: expected an array of curve entries");
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& e = doc[i];
        if (!e.is_object()) throw error(errc::parse_error, "entry " + std::to_string(i) + ": expected an object");
        curve_spec c;
        c.label = detail::json_field<std::string>(e, "label", i);
        c.N = detail::json_field<u64>(e, "N", i);
        c.D = detail::json_field<u64>(e, "D", i);
        auto coeffs = detail::json_field<std::vector<i64>>(e, "coeffs", i);
        if (coeffs.size() != 7)
            throw error(errc::parse_error, "entry " + std::to_string(i) + " (" + c.label + "), field coeffs: expected 7 integers, got " +
                                               std::to_string(coeffs.size()));
        std::copy(coeffs.begin(), coeffs.end(), c.coeffs.begin());
        try {
            cat.add(c);
        } catch (const error& err) {
            throw error(err.code(), "entry " + std::to_string(i) + ": " + err.what());
        }
    }
    return cat;
}

}  // namespace ltq
