#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mrir/common.hpp"
#include "mrir/image.hpp"

namespace mrir {

enum class Role { train, val, test };
enum class Augmentation { none, rot90, rot180, rot270 };

inline std::string to_string(Role r) {
    switch (r) {
        case Role::train: return "train";
        case Role::val: return "val";
        default: return "test";
    }
}

inline Role role_from_string(const std::string& s) {
    if (s == "train") return Role::train;
    if (s == "val") return Role::val;
    if (s == "test") return Role::test;
    throw format_error("unknown role '" + s + "'", 0);
}

inline std::string to_string(Augmentation a) {
    switch (a) {
        case Augmentation::none: return "none";
        case Augmentation::rot90: return "rot90";
        case Augmentation::rot180: return "rot180";
        default: return "rot270";
    }
}

inline Augmentation augmentation_from_string(const std::string& s) {
    if (s == "none") return Augmentation::none;
    if (s == "rot90") return Augmentation::rot90;
    if (s == "rot180") return Augmentation::rot180;
    if (s == "rot270") return Augmentation::rot270;
    throw format_error("unknown augmentation '" + s + "'", 0);
}

// One LQ/HQ pair. Paths are stored relative to the manifest file.
struct ManifestRecord {
    std::string pair_id;
    std::string subject_id;
    Role role = Role::train;
    std::string lq_path;
    std::string hq_path;
    Augmentation augmentation = Augmentation::none;
};

struct Manifest {
    std::filesystem::path dir;  // directory the relative paths resolve against
    std::vector<ManifestRecord> records;

    std::filesystem::path lq_file(const ManifestRecord& r) const { return dir / r.lq_path; }
    std::filesystem::path hq_file(const ManifestRecord& r) const { return dir / r.hq_path; }

    std::vector<const ManifestRecord*> with_role(Role role) const {
        std::vector<const ManifestRecord*> out;
        for (const auto& r : records)
            if (r.role == role) out.push_back(&r);
        return out;
    }
};

inline void write_manifest(const Manifest& m, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot open manifest for write: " + path.string());
    for (const auto& r : m.records) {
        f << r.pair_id << '\t' << r.subject_id << '\t' << to_string(r.role) << '\t' << r.lq_path
          << '\t' << r.hq_path << '\t' << to_string(r.augmentation) << '\n';
    }
    if (!f) throw io_error("short write: " + path.string());
}

inline Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open manifest: " + path.string());
    Manifest m;
    m.dir = path.has_parent_path() ? path.parent_path() : ".";
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        ManifestRecord r;
        std::string role, aug;
        if (!std::getline(ss, r.pair_id, '\t') || !std::getline(ss, r.subject_id, '\t') ||
            !std::getline(ss, role, '\t') || !std::getline(ss, r.lq_path, '\t') ||
            !std::getline(ss, r.hq_path, '\t') || !std::getline(ss, aug))
            throw format_error("manifest line " + std::to_string(lineno) + " malformed", 0);
        r.role = role_from_string(role);
        r.augmentation = augmentation_from_string(aug);
        m.records.push_back(std::move(r));
    }
    return m;
}

// Subject-role disjointness plus on-disk existence; when hq_size > 0 the HQ
// images must match it.
inline void validate_manifest(const Manifest& m, std::size_t hq_size = 0) {
    std::map<std::string, Role> roles;
    for (const auto& r : m.records) {
        auto [it, inserted] = roles.emplace(r.subject_id, r.role);
        if (!inserted && it->second != r.role)
            throw config_error("subject '" + r.subject_id + "' spans two roles");
        if (!std::filesystem::exists(m.lq_file(r)))
            throw io_error("missing LQ file: " + m.lq_file(r).string());
        if (!std::filesystem::exists(m.hq_file(r)))
            throw io_error("missing HQ file: " + m.hq_file(r).string());
        if (hq_size) {
            auto hq = read_image<float>(m.hq_file(r));
            if (hq.h != hq_size || hq.w != hq_size)
                throw dimension_error("HQ file size mismatch: " + m.hq_file(r).string());
        }
    }
}

}  // namespace mrir
