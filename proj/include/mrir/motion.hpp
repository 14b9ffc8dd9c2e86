#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mrir/common.hpp"
#include "mrir/degrade.hpp"
#include "mrir/image.hpp"
#include "mrir/kspace.hpp"
#include "mrir/manifest.hpp"
#include "mrir/rng.hpp"
#include "mrir/split.hpp"

namespace mrir {

// One rigid in-plane move: integer voxel shift (applied first) and a rotation
// in degrees about the image center. dx = dy = 0 marks a rotation-only move.
struct Move {
    int dx = 0;
    int dy = 0;
    double angle_deg = 0.0;

    bool operator==(const Move&) const = default;
};

// Phase-encoding lines are spectrum rows; row indices are in the DC-centered
// layout, matching the central low-frequency protection band.
struct MotionSegment {
    std::size_t row_start = 0;
    std::size_t row_len = 0;
    std::size_t move_index = 0;

    bool operator==(const MotionSegment&) const = default;
};

struct MotionPlan {
    std::vector<Move> moves;
    std::vector<MotionSegment> segments;
    double severity = 0.0;  // replaced rows / total rows

    bool operator==(const MotionPlan&) const = default;
};

template <typename T>
Image<T> shift_image(const Image<T>& img, int dx, int dy) {
    if (std::abs(dx) >= static_cast<int>(img.w) || std::abs(dy) >= static_cast<int>(img.h))
        throw dimension_error("shift_image: shift exceeds image dims");
    Image<T> out(img.h, img.w);
    for (std::size_t r = 0; r < img.h; ++r) {
        const std::int64_t sr = static_cast<std::int64_t>(r) - dy;
        if (sr < 0 || sr >= static_cast<std::int64_t>(img.h)) continue;
        for (std::size_t c = 0; c < img.w; ++c) {
            const std::int64_t sc = static_cast<std::int64_t>(c) - dx;
            if (sc < 0 || sc >= static_cast<std::int64_t>(img.w)) continue;
            out.at(r, c) = img.at(static_cast<std::size_t>(sr), static_cast<std::size_t>(sc));
        }
    }
    return out;
}

// Bilinear rotation about the image center, zero outside the source footprint.
template <typename T>
Image<T> rotate_image(const Image<T>& img, double angle_deg) {
    if (!std::isfinite(angle_deg)) throw config_error("rotate_image: non-finite angle");
    if (angle_deg == 0.0) return img;
    const double a = angle_deg * 3.141592653589793 / 180.0;
    const double ca = std::cos(a), sa = std::sin(a);
    const double cy = (double(img.h) - 1.0) / 2.0;
    const double cx = (double(img.w) - 1.0) / 2.0;
    Image<T> out(img.h, img.w);
    for (std::size_t r = 0; r < img.h; ++r) {
        for (std::size_t c = 0; c < img.w; ++c) {
            // inverse mapping
            const double dy = double(r) - cy, dx = double(c) - cx;
            const double sy = cy + (sa * dx + ca * dy);
            const double sx = cx + (ca * dx - sa * dy);
            const auto y0 = static_cast<std::int64_t>(std::floor(sy));
            const auto x0 = static_cast<std::int64_t>(std::floor(sx));
            const double fy = sy - double(y0), fx = sx - double(x0);
            auto sample = [&](std::int64_t y, std::int64_t x) -> double {
                if (y < 0 || x < 0 || y >= static_cast<std::int64_t>(img.h) ||
                    x >= static_cast<std::int64_t>(img.w))
                    return 0.0;
                return double(img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)));
            };
            const double v = (1 - fy) * ((1 - fx) * sample(y0, x0) + fx * sample(y0, x0 + 1)) +
                             fy * ((1 - fx) * sample(y0 + 1, x0) + fx * sample(y0 + 1, x0 + 1));
            out.at(r, c) = T(v);
        }
    }
    return out;
}

template <typename T>
Image<T> apply_move(const Image<T>& img, const Move& m) {
    Image<T> out = (m.dx || m.dy) ? shift_image(img, m.dx, m.dy) : img;
    if (m.angle_deg != 0.0) out = rotate_image(out, m.angle_deg);
    return out;
}

inline void validate_plan(const MotionPlan& plan, std::size_t rows) {
    std::vector<char> taken(rows, 0);
    for (const auto& s : plan.segments) {
        if (s.row_len == 0 || s.row_start + s.row_len > rows)
            throw config_error("motion plan: segment out of range");
        if (s.move_index >= plan.moves.size())
            throw config_error("motion plan: segment references missing move");
        for (std::size_t r = s.row_start; r < s.row_start + s.row_len; ++r) {
            if (taken[r]) throw config_error("motion plan: overlapping segments");
            taken[r] = 1;
        }
    }
}

// Spliced DC-centered spectrum: rows inside segments come from the spectra of
// the moved copies, everything else is the original, bit for bit.
template <typename T>
Spectrum<T> splice_spectrum(const Image<T>& orig, const MotionPlan& plan) {
    validate_plan(plan, orig.h);
    auto result = shift_center(fft2_ortho(orig));
    std::vector<Spectrum<T>> moved;
    moved.reserve(plan.moves.size());
    for (const auto& m : plan.moves)
        moved.push_back(shift_center(fft2_ortho(apply_move(orig, m))));
    for (const auto& s : plan.segments) {
        const auto& src = moved[s.move_index];
        for (std::size_t r = s.row_start; r < s.row_start + s.row_len; ++r)
            for (std::size_t c = 0; c < orig.w; ++c) result.at(r, c) = src.at(r, c);
    }
    return result;
}

template <typename T>
Image<T> splice_kspace(const Image<T>& orig, const MotionPlan& plan, bool clamp = true) {
    if (plan.segments.empty()) return clamp ? clamp01(orig) : orig;  // nothing replaced
    auto img = ifft2_ortho(shift_center(splice_spectrum(orig, plan)));
    return clamp ? clamp01(std::move(img)) : img;
}

// ---------------------------------------------------------------------------
// Seeded motion sampling

struct MotionOptions {
    std::size_t variants = 5;
    double severity_lo = 0.05;
    double severity_hi = 0.35;
    std::size_t protect_center = 8;  // central rows never replaced; 0 disables
};

namespace detail {

inline MotionPlan sample_plan(std::size_t rows, const MotionOptions& opt, Rng& rng) {
    MotionPlan plan;
    const auto n_moves = static_cast<std::size_t>(rng.uniform_int(1, 4));
    for (std::size_t i = 0; i < n_moves; ++i) {
        Move m;
        const auto mode = rng.uniform_int(0, 2);  // shift / rotate / both
        if (mode != 1) {
            const auto axes = rng.uniform_int(0, 2);  // x / y / both
            if (axes != 1) m.dx = (rng.uniform() < 0.5 ? -1 : 1) * int(rng.uniform_int(1, 8));
            if (axes != 0) m.dy = (rng.uniform() < 0.5 ? -1 : 1) * int(rng.uniform_int(1, 8));
        }
        if (mode != 0) m.angle_deg = rng.uniform(0.0, 5.0);
        plan.moves.push_back(m);
    }

    const double severity = rng.uniform(opt.severity_lo, opt.severity_hi);
    const auto target = static_cast<std::size_t>(std::floor(severity * double(rows)));
    const std::size_t protect_lo = rows / 2 - opt.protect_center / 2;
    const std::size_t protect_hi = protect_lo + opt.protect_center;
    if (target == 0 || target > rows - opt.protect_center)
        throw config_error("motion: severity infeasible for image height");

    const auto n_segments = static_cast<std::size_t>(
        rng.uniform_int(1, static_cast<std::int64_t>(std::min<std::size_t>(6, target))));
    // random composition of target into n_segments positive lengths
    std::vector<std::size_t> lengths;
    std::size_t remaining = target;
    for (std::size_t i = 0; i + 1 < n_segments; ++i) {
        const std::size_t slots_left = n_segments - i - 1;
        const auto len = static_cast<std::size_t>(
            rng.uniform_int(1, static_cast<std::int64_t>(remaining - slots_left)));
        lengths.push_back(len);
        remaining -= len;
    }
    lengths.push_back(remaining);

    for (const std::size_t len : lengths) {
        bool placed = false;
        for (int attempt = 0; attempt < 400 && !placed; ++attempt) {
            const auto start =
                static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(rows - len)));
            const std::size_t end = start + len;
            if (opt.protect_center && start < protect_hi && end > protect_lo) continue;
            bool clash = false;
            for (const auto& s : plan.segments) {
                if (start < s.row_start + s.row_len && end > s.row_start) {
                    clash = true;
                    break;
                }
            }
            if (clash) continue;
            MotionSegment seg;
            seg.row_start = start;
            seg.row_len = len;
            seg.move_index = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(plan.moves.size()) - 1));
            plan.segments.push_back(seg);
            placed = true;
        }
        if (!placed) return MotionPlan{};  // caller resamples
    }
    plan.severity = double(target) / double(rows);
    return plan;
}

}  // namespace detail

// n independent seeded plans and their artifact images; plans are pairwise
// distinct (resampled on collision).
template <typename T>
std::vector<std::pair<Image<T>, MotionPlan>> gen_motion_set(const Image<T>& img, std::size_t n,
                                                            const MotionOptions& opt,
                                                            std::uint64_t seed) {
    if (n < 1) throw config_error("gen_motion_set: n must be >= 1");
    if (opt.protect_center >= img.h)
        throw config_error("gen_motion_set: protected band exceeds image");
    std::vector<std::pair<Image<T>, MotionPlan>> out;
    std::vector<MotionPlan> seen;
    for (std::size_t i = 0; i < n; ++i) {
        MotionPlan plan;
        bool ok = false;
        for (std::uint64_t attempt = 0; attempt < 64 && !ok; ++attempt) {
            Rng rng(Rng::derive(seed, "motion-plan", i * 1000 + attempt));
            plan = detail::sample_plan(img.h, opt, rng);
            if (plan.segments.empty()) continue;  // placement failed
            ok = std::none_of(seen.begin(), seen.end(),
                              [&](const MotionPlan& p) { return p == plan; });
        }
        if (!ok) throw config_error("gen_motion_set: could not sample a feasible distinct plan");
        seen.push_back(plan);
        out.emplace_back(splice_kspace(img, plan), plan);
    }
    return out;
}

// ---------------------------------------------------------------------------
// MAR dataset construction (full slices; the 5 variants are the augmentation)

struct MarDatasetOptions {
    MotionOptions motion;
    std::array<std::size_t, 3> split{21, 4, 3};
    std::uint64_t seed = 0;
    std::size_t roi = 0;  // 0 = use slices as-is
};

struct MarPairInfo {
    std::string pair_id;
    double severity = 0;
    std::size_t n_moves = 0;
    std::size_t n_segments = 0;
};

// Writes GT/MA pairs plus a severity sidecar (severity.tsv) and the manifest.
inline Manifest build_mar_dataset(const std::vector<SliceStack>& subjects,
                                  const MarDatasetOptions& opt,
                                  const std::filesystem::path& out_dir,
                                  std::vector<MarPairInfo>* info_out = nullptr) {
    if (subjects.empty()) throw config_error("build_mar_dataset: no subjects");
    if (opt.split[0] + opt.split[1] + opt.split[2] != subjects.size())
        throw config_error("build_mar_dataset: split does not match subject count");

    const auto roles = split_subjects(subjects.size(), opt.split, opt.seed);
    std::filesystem::create_directories(out_dir);

    Manifest manifest;
    manifest.dir = out_dir;
    std::vector<MarPairInfo> infos;
    char buf[160];

    for (std::size_t si = 0; si < subjects.size(); ++si) {
        const auto& subject = subjects[si];
        const auto subj_dir = out_dir / subject.subject_id;
        std::filesystem::create_directories(subj_dir);

        for (std::size_t zi = 0; zi < subject.slices.size(); ++zi) {
            Image2D slice = subject.slices[zi];
            if (opt.roi) slice = crop_roi(slice, opt.roi);
            Image2D gt = normalize_unit(slice);

            std::snprintf(buf, sizeof(buf), "%s/%s_s%02zu_gt.mrir", subject.subject_id.c_str(),
                          subject.subject_id.c_str(), zi);
            const std::string gt_path = buf;
            write_image(gt.cast<float>(), out_dir / gt_path);

            const auto variants = gen_motion_set(
                gt, opt.motion.variants, opt.motion,
                Rng::derive(opt.seed, subject.subject_id + "_s" + std::to_string(zi)));

            for (std::size_t vi = 0; vi < variants.size(); ++vi) {
                std::snprintf(buf, sizeof(buf), "%s_s%02zu_v%zu", subject.subject_id.c_str(), zi,
                              vi);
                ManifestRecord rec;
                rec.pair_id = buf;
                rec.subject_id = subject.subject_id;
                rec.role = roles[si];
                rec.augmentation = Augmentation::none;
                rec.hq_path = gt_path;
                rec.lq_path = subject.subject_id + "/" + rec.pair_id + "_ma.mrir";
                write_image(variants[vi].first.template cast<float>(), out_dir / rec.lq_path);

                MarPairInfo info;
                info.pair_id = rec.pair_id;
                info.severity = variants[vi].second.severity;
                info.n_moves = variants[vi].second.moves.size();
                info.n_segments = variants[vi].second.segments.size();
                infos.push_back(info);
                manifest.records.push_back(std::move(rec));
            }
        }
    }

    write_manifest(manifest, out_dir / "manifest.tsv");
    {
        std::ofstream f(out_dir / "severity.tsv", std::ios::binary | std::ios::trunc);
        for (const auto& i : infos) {
            f << i.pair_id << '\t';
            std::snprintf(buf, sizeof(buf), "%.6f", i.severity);
            f << buf << '\t' << i.n_moves << '\t' << i.n_segments << '\n';
        }
    }
    if (info_out) *info_out = std::move(infos);
    return manifest;
}

inline std::map<std::string, double> read_severity_sidecar(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open severity sidecar: " + path.string());
    std::map<std::string, double> out;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id, sev;
        std::getline(ss, id, '\t');
        std::getline(ss, sev, '\t');
        out[id] = std::stod(sev);
    }
    return out;
}

}  // namespace mrir
