#include "aropf/keyvalue.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "aropf/errors.hpp"

namespace aropf {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

const KvEntry* KvSection::find(std::string_view key) const {
    for (const auto& e : entries)
        if (e.key == key) return &e;
    return nullptr;
}

KvDocument parse_keyvalue(std::string_view text) {
    KvDocument doc;
    KvSection* current = &doc.top;
    int lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        std::string_view line = trim(raw);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(lineno, "", "unterminated section header");
            std::string_view inner = trim(line.substr(1, line.size() - 2));
            if (inner.empty()) throw ParseError(lineno, "", "empty section header");
            KvSection sec;
            sec.line = lineno;
            auto sp = inner.find_first_of(" \t");
            if (sp == std::string_view::npos) {
                sec.kind = std::string(inner);
            } else {
                sec.kind = std::string(inner.substr(0, sp));
                sec.label = std::string(trim(inner.substr(sp)));
                if (sec.label.find_first_of(" \t") != std::string::npos)
                    throw ParseError(lineno, "", "section label must be a single token");
            }
            doc.sections.push_back(std::move(sec));
            current = &doc.sections.back();
        } else {
            auto eq = line.find('=');
            if (eq == std::string_view::npos) throw ParseError(lineno, "", "expected 'key = value'");
            KvEntry e;
            e.key = std::string(trim(line.substr(0, eq)));
            e.value = std::string(trim(line.substr(eq + 1)));
            e.line = lineno;
            if (e.key.empty()) throw ParseError(lineno, "", "missing key");
            if (current->find(e.key)) throw ParseError(lineno, e.key, "duplicate key");
            current->entries.push_back(std::move(e));
        }
        if (end == text.size()) break;
    }
    return doc;
}

double kv_number(const KvEntry& e) {
    const char* s = e.value.c_str();
    char* endp = nullptr;
    errno = 0;
    double v = std::strtod(s, &endp);
    if (endp == s || *endp != '\0' || errno == ERANGE || !std::isfinite(v))
        throw ParseError(e.line, e.key, "not a finite number: '" + e.value + "'");
    return v;
}

int kv_integer(const KvEntry& e) {
    const char* s = e.value.c_str();
    char* endp = nullptr;
    long v = std::strtol(s, &endp, 10);
    if (endp == s || *endp != '\0') throw ParseError(e.line, e.key, "not an integer: '" + e.value + "'");
    return static_cast<int>(v);
}

bool kv_bool(const KvEntry& e) {
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw ParseError(e.line, e.key, "not a boolean: '" + e.value + "'");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace aropf
