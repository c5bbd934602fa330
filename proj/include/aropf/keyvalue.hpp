#pragma once

// Line-oriented "key = value" documents with "[kind label]" section headers.
// '#' starts a comment. Used by grid, cost, injection and solution files.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aropf {

struct KvEntry {
    std::string key;
    std::string value;
    int line = 0;
};

struct KvSection {
    std::string kind;
    std::string label;  // empty for "[kind]"
    int line = 0;
    std::vector<KvEntry> entries;

    const KvEntry* find(std::string_view key) const;
};

struct KvDocument {
    KvSection top;  // entries before the first header
    std::vector<KvSection> sections;
};

KvDocument parse_keyvalue(std::string_view text);

double kv_number(const KvEntry& e);
int kv_integer(const KvEntry& e);
bool kv_bool(const KvEntry& e);

std::string read_text_file(const std::string& path);

}  // namespace aropf
