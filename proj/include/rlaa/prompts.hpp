#pragma once

#include <cctype>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rlaa/errors.hpp"
#include "rlaa/util.hpp"

namespace rlaa {

/// A prompt template file holds a [[system]] section and one or more user
/// sections. [[user]] is the generic body; [[user:<schema_id>]] overrides it
/// for that schema.
struct PromptTemplate {
    std::string system_text;
    std::map<std::string, std::string> user_bodies;  // "" key is the generic body

    const std::string& user_body(const std::string& schema_id) const {
        if (auto it = user_bodies.find(schema_id); it != user_bodies.end()) return it->second;
        if (auto it = user_bodies.find(""); it != user_bodies.end()) return it->second;
        throw TemplateError("no user section applicable to schema " + schema_id);
    }
};

namespace detail {

inline std::string strip_outer_blank_lines(const std::string& body) {
    size_t begin = 0, end = body.size();
    while (begin < end && (body[begin] == '\n' || body[begin] == '\r')) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(body[end - 1]))) --end;
    return body.substr(begin, end - begin);
}

}  // namespace detail

inline PromptTemplate parse_template(const std::string& content, const std::string& origin) {
    PromptTemplate tmpl;
    std::string section;  // marker of the section being accumulated
    std::string body;
    bool saw_system = false;

    auto commit = [&] {
        if (section.empty()) {
            if (!trim(body).empty())
                throw TemplateError(origin + ": content before the first section marker");
            return;
        }
        const std::string text = detail::strip_outer_blank_lines(body);
        if (section == "system") {
            tmpl.system_text = text;
            saw_system = true;
        } else if (section == "user") {
            tmpl.user_bodies[""] = text;
        } else if (section.rfind("user:", 0) == 0) {
            tmpl.user_bodies[section.substr(5)] = text;
        } else {
            throw TemplateError(origin + ": unknown section [[" + section + "]]");
        }
        body.clear();
    };

    size_t pos = 0;
    while (pos <= content.size()) {
        const size_t eol = content.find('\n', pos);
        const std::string line =
            content.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
        const std::string t = trim(line);
        if (t.size() > 4 && t.rfind("[[", 0) == 0 && t.substr(t.size() - 2) == "]]") {
            commit();
            section = t.substr(2, t.size() - 4);
        } else {
            body += line;
            body += '\n';
        }
        if (eol == std::string::npos) break;
        pos = eol + 1;
    }
    commit();

    if (!saw_system) throw TemplateError(origin + ": missing [[system]] section");
    if (tmpl.user_bodies.empty()) throw TemplateError(origin + ": missing [[user]] section");
    return tmpl;
}

inline PromptTemplate load_template(const std::filesystem::path& path) {
    return parse_template(read_file(path), path.string());
}

/// Replaces {name} for names present in values, in one left-to-right pass.
/// Braces that do not form a known placeholder pass through untouched, which
/// lets templates contain literal JSON.
inline std::string render(const std::string& text,
                          const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (pos < text.size()) {
        const char c = text[pos];
        if (c != '{') {
            out += c;
            ++pos;
            continue;
        }
        const size_t close = text.find('}', pos + 1);
        if (close != std::string::npos) {
            const std::string name = text.substr(pos + 1, close - pos - 1);
            if (auto it = values.find(name); it != values.end()) {
                out += it->second;
                pos = close + 1;
                continue;
            }
        }
        out += c;
        ++pos;
    }
    return out;
}

}  // namespace rlaa
