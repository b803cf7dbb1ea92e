#pragma once

// The five-level geographic hierarchy: World -> UN region -> UN sub-region
// -> UN intermediate region -> ISO country or dependent territory. Built from
// a CSV in the ISO-3166-with-UN-regional-codes layout; aggregates are keyed
// by their numeric UN codes, countries by alpha-3.

#include <json.hpp>

#include <array>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "geodefault/csv.hpp"
#include "geodefault/error.hpp"

namespace geodefault {

enum class Level : int {
    world = 0,
    un_region = 1,
    un_sub_region = 2,
    un_intermediate_region = 3,
    country = 4,
};

constexpr int kLevelCount = 5;

inline int level_ordinal(Level l) { return static_cast<int>(l); }

inline Level level_from_ordinal(long long ordinal) {
    if (ordinal < 0 || ordinal >= kLevelCount)
        throw_input("level ordinal out of range: " + std::to_string(ordinal));
    return static_cast<Level>(ordinal);
}

inline const char* level_name(Level l) {
    switch (l) {
    case Level::world: return "World";
    case Level::un_region: return "UN region";
    case Level::un_sub_region: return "UN sub-region";
    case Level::un_intermediate_region: return "UN intermediate region";
    case Level::country: return "ISO country or dependent territory";
    }
    return "?";
}

constexpr const char* kWorldCode = "001";

struct RegionNode {
    std::string code;
    std::string name;
    Level level = Level::world;
    std::string parent_code; // empty only for the World root
};

struct RegionHierarchy {
    std::map<std::string, RegionNode> nodes; // keyed by code, sorted
    std::string root = kWorldCode;
    std::set<std::string> exclusions;

    bool contains(const std::string& code) const { return nodes.count(code) != 0; }

    const RegionNode& at(const std::string& code) const {
        const auto it = nodes.find(code);
        if (it == nodes.end()) throw_input("unknown region code: " + code);
        return it->second;
    }

    /// True when `code` is a strict descendant of `ancestor`.
    bool is_descendant_of(const std::string& code, const std::string& ancestor) const {
        const RegionNode* node = &at(code);
        while (!node->parent_code.empty()) {
            if (node->parent_code == ancestor) return true;
            node = &at(node->parent_code);
        }
        return false;
    }

    /// Node count per level; pass true to skip excluded codes.
    std::array<int, kLevelCount> level_counts(bool apply_exclusions) const {
        std::array<int, kLevelCount> counts{};
        for (const auto& [code, node] : nodes) {
            if (apply_exclusions && exclusions.count(code)) continue;
            ++counts[level_ordinal(node.level)];
        }
        return counts;
    }
};

/// "forest" for World, "forest in {name}" for everything else.
inline std::string prompt_for(const RegionNode& node) {
    if (node.level == Level::world) return "forest";
    return "forest in " + node.name;
}

namespace detail {

inline std::string slugify(const std::string& name) {
    std::string out;
    bool pending_dash = false;
    for (const char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            if (pending_dash && !out.empty()) out += '-';
            pending_dash = false;
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else {
            pending_dash = true;
        }
    }
    if (out.empty()) throw_input("cannot derive identifier from name: \"" + name + "\"");
    return out;
}

} // namespace detail

/// Consistency checks over the whole tree: single root, parent links valid,
/// parent ordinals strictly smaller, exclusions resolvable.
inline void validate_hierarchy(const RegionHierarchy& h) {
    if (!h.contains(h.root)) throw_input("hierarchy root " + h.root + " not present");
    if (h.at(h.root).level != Level::world || !h.at(h.root).parent_code.empty())
        throw_input("hierarchy root must be a parentless World node");
    for (const auto& [code, node] : h.nodes) {
        if (code != node.code) throw_input("node key/code mismatch for " + code);
        if (code == h.root) continue;
        if (node.parent_code.empty()) throw_input("second root found: " + code);
        const auto parent = h.nodes.find(node.parent_code);
        if (parent == h.nodes.end())
            throw_input("node " + code + " references missing parent " + node.parent_code);
        if (level_ordinal(parent->second.level) >= level_ordinal(node.level))
            throw_input("node " + code + " has parent at level >= its own");
    }
    for (const auto& code : h.exclusions)
        if (!h.contains(code)) throw_input("exclusion list names unknown region: " + code);
}

/// Builds the hierarchy from the region table. Aggregate nodes are created
/// once on first mention; countries attach to the intermediate region when
/// present, else the sub-region, else the region, else directly to World.
/// The result does not depend on row order.
inline RegionHierarchy parse_region_table(const CsvTable& table) {
    const std::size_t col_name = table.column("name");
    const std::size_t col_alpha3 = table.column("alpha-3");
    const std::size_t col_region = table.column("region");
    const std::size_t col_sub = table.column("sub-region");
    const std::size_t col_inter = table.column("intermediate-region");
    const std::size_t col_region_code = table.column("region-code");
    const std::size_t col_sub_code = table.column("sub-region-code");
    const std::size_t col_inter_code = table.column("intermediate-region-code");

    if (table.rows.empty()) throw_input("region table has no data rows");

    RegionHierarchy h;
    h.nodes[kWorldCode] = RegionNode{kWorldCode, "World", Level::world, ""};

    auto ensure_aggregate = [&h](const std::string& name, const std::string& code_cell, Level level,
                                 const std::string& parent, std::size_t row_no) -> std::string {
        const std::string code = !code_cell.empty() ? code_cell : detail::slugify(name);
        const auto it = h.nodes.find(code);
        if (it == h.nodes.end()) {
            h.nodes[code] = RegionNode{code, name, level, parent};
            return code;
        }
        const RegionNode& existing = it->second;
        if (existing.name != name || existing.level != level || existing.parent_code != parent)
            throw_input("row " + std::to_string(row_no) + ": region code " + code +
                        " already defined as \"" + existing.name + "\" with a different placement");
        return code;
    };

    std::size_t row_no = 1; // header is row 1
    for (const auto& row : table.rows) {
        ++row_no;
        const std::string& name = row[col_name];
        const std::string& alpha3 = row[col_alpha3];
        if (name.empty()) throw_input("row " + std::to_string(row_no) + ": empty name");
        if (alpha3.empty()) throw_input("row " + std::to_string(row_no) + ": empty alpha-3 code for \"" + name + "\"");

        const std::string& region = row[col_region];
        const std::string& sub = row[col_sub];
        const std::string& inter = row[col_inter];
        if (!inter.empty() && sub.empty())
            throw_input("row " + std::to_string(row_no) + ": intermediate region \"" + inter +
                        "\" without a sub-region");
        if (!sub.empty() && region.empty())
            throw_input("row " + std::to_string(row_no) + ": sub-region \"" + sub + "\" without a region");

        std::string parent = kWorldCode;
        if (!region.empty())
            parent = ensure_aggregate(region, row[col_region_code], Level::un_region, parent, row_no);
        if (!sub.empty())
            parent = ensure_aggregate(sub, row[col_sub_code], Level::un_sub_region, parent, row_no);
        if (!inter.empty())
            parent = ensure_aggregate(inter, row[col_inter_code], Level::un_intermediate_region, parent, row_no);

        if (h.nodes.count(alpha3))
            throw_input("row " + std::to_string(row_no) + ": duplicate country code " + alpha3);
        h.nodes[alpha3] = RegionNode{alpha3, name, Level::country, parent};
    }

    validate_hierarchy(h);
    return h;
}

/// All nodes at exactly `level` whose ancestor chain contains `ancestor`,
/// sorted by code, minus the given exclusions.
inline std::vector<RegionNode> descendants_at_level(const RegionHierarchy& h, const std::string& ancestor,
                                                    Level level, const std::set<std::string>& excluded) {
    const RegionNode& anc = h.at(ancestor);
    if (level_ordinal(level) <= level_ordinal(anc.level))
        throw_input("requested level " + std::string(level_name(level)) + " is not below " + ancestor);
    std::vector<RegionNode> out;
    for (const auto& [code, node] : h.nodes) {
        if (node.level != level) continue;
        if (excluded.count(code)) continue;
        if (h.is_descendant_of(code, ancestor)) out.push_back(node);
    }
    return out; // map iteration order is already sorted by code
}

inline std::vector<RegionNode> descendants_at_level(const RegionHierarchy& h, const std::string& ancestor,
                                                    Level level) {
    return descendants_at_level(h, ancestor, level, h.exclusions);
}

inline nlohmann::json hierarchy_to_json(const RegionHierarchy& h) {
    nlohmann::json nodes = nlohmann::json::object();
    for (const auto& [code, node] : h.nodes) {
        nlohmann::json entry = {{"name", node.name}, {"level", level_ordinal(node.level)}};
        if (!node.parent_code.empty()) entry["parent"] = node.parent_code;
        nodes[code] = std::move(entry);
    }
    return nlohmann::json{{"root", h.root},
                          {"exclusions", std::vector<std::string>(h.exclusions.begin(), h.exclusions.end())},
                          {"nodes", std::move(nodes)}};
}

inline RegionHierarchy hierarchy_from_json(const nlohmann::json& j) {
    RegionHierarchy h;
    try {
        h.root = j.at("root").get<std::string>();
        for (const auto& code : j.at("exclusions")) h.exclusions.insert(code.get<std::string>());
        for (const auto& [code, entry] : j.at("nodes").items()) {
            RegionNode node;
            node.code = code;
            node.name = entry.at("name").get<std::string>();
            node.level = level_from_ordinal(entry.at("level").get<long long>());
            node.parent_code = entry.value("parent", std::string());
            h.nodes[code] = std::move(node);
        }
    } catch (const nlohmann::json::exception& e) {
        throw_input(std::string("malformed hierarchy JSON: ") + e.what());
    }
    validate_hierarchy(h);
    return h;
}

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
inline std::string hierarchy_to_canonical_json(const RegionHierarchy& h) {
    return hierarchy_to_json(h).dump(2) + "\n";
}

} // namespace geodefault
