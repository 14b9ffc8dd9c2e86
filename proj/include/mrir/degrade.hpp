#pragma once

#include <array>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "mrir/common.hpp"
#include "mrir/image.hpp"
#include "mrir/kspace.hpp"
#include "mrir/manifest.hpp"
#include "mrir/split.hpp"

namespace mrir {

// Patch geometry of one LR/HR pair; LR sizes are the HR sizes divided by the
// SR factor.
struct SrPairSpec {
    int sr_factor = 2;
    std::size_t hr_patch = 128;
    std::size_t hr_stride = 64;

    std::size_t lr_patch() const { return hr_patch / static_cast<std::size_t>(sr_factor); }
    std::size_t lr_stride() const { return hr_stride / static_cast<std::size_t>(sr_factor); }
};

inline void validate(const SrPairSpec& s) {
    if (s.sr_factor != 2 && s.sr_factor != 4) throw config_error("sr_factor must be 2 or 4");
    const auto f = static_cast<std::size_t>(s.sr_factor);
    if (s.hr_patch == 0 || s.hr_stride == 0 || s.hr_patch % f || s.hr_stride % f)
        throw config_error("hr_patch and hr_stride must be positive multiples of the factor");
}

// Low-resolution simulation: keep only the central k-space block.
// fft -> center -> crop(dims/factor) -> back to standard -> ifft, then unit
// normalization unless the caller wants the raw band-limited image.
template <typename T>
Image<T> fourier_downsample(const Image<T>& img, int factor, bool normalize = true) {
    if (factor < 1) throw config_error("fourier_downsample: factor must be >= 1");
    const auto f = static_cast<std::size_t>(factor);
    if (img.h % (2 * f) || img.w % (2 * f))
        throw dimension_error("fourier_downsample: dims must be divisible by 2*factor");
    auto spec = shift_center(fft2_ortho(img));
    auto cropped = crop_center(spec, img.h / f, img.w / f);
    auto out = ifft2_ortho(shift_center(cropped));
    return normalize ? normalize_unit(out) : out;
}

// Zero-filled k-space upsampling (band-limited interpolation); the inverse of
// fourier_downsample on in-band signals. Unclamped.
template <typename T>
Image<T> kspace_upsample(const Image<T>& img, int factor) {
    if (factor < 1) throw config_error("kspace_upsample: factor must be >= 1");
    if (img.h % 2 || img.w % 2) throw dimension_error("kspace_upsample: dims must be even");
    const auto f = static_cast<std::size_t>(factor);
    auto spec = shift_center(fft2_ortho(img));
    auto padded = pad_center(spec, img.h * f, img.w * f);
    return ifft2_ortho(shift_center(padded));
}

// Centered square region-of-interest crop.
template <typename T>
Image<T> crop_roi(const Image<T>& img, std::size_t out = 256) {
    if (img.h < out || img.w < out) throw dimension_error("crop_roi: input smaller than ROI");
    const std::size_t r0 = (img.h - out) / 2;
    const std::size_t c0 = (img.w - out) / 2;
    Image<T> res(out, out);
    for (std::size_t r = 0; r < out; ++r)
        for (std::size_t c = 0; c < out; ++c) res.at(r, c) = img.at(r0 + r, c0 + c);
    return res;
}

template <typename T>
struct PatchAt {
    Image<T> image;
    std::size_t row = 0;
    std::size_t col = 0;
};

// Grid patch extraction, row-major order, no padding: (dim - patch) must be
// divisible by the stride.
template <typename T>
std::vector<PatchAt<T>> extract_patches(const Image<T>& img, std::size_t patch,
                                        std::size_t stride) {
    if (patch == 0 || patch > img.h || patch > img.w)
        throw dimension_error("extract_patches: patch size exceeds image");
    if (stride == 0) throw dimension_error("extract_patches: zero stride");
    if ((img.h - patch) % stride || (img.w - patch) % stride)
        throw dimension_error("extract_patches: (dim - patch) not divisible by stride");
    const std::size_t ny = (img.h - patch) / stride + 1;
    const std::size_t nx = (img.w - patch) / stride + 1;
    std::vector<PatchAt<T>> out;
    out.reserve(ny * nx);
    for (std::size_t py = 0; py < ny; ++py) {
        for (std::size_t px = 0; px < nx; ++px) {
            PatchAt<T> p;
            p.row = py * stride;
            p.col = px * stride;
            p.image = Image<T>(patch, patch);
            for (std::size_t r = 0; r < patch; ++r)
                for (std::size_t c = 0; c < patch; ++c)
                    p.image.at(r, c) = img.at(p.row + r, p.col + c);
            out.push_back(std::move(p));
        }
    }
    return out;
}

// Exact index-permutation rotations; (0,0) lands at (0,N-1) under rot90.
template <typename T>
Image<T> rotate90(const Image<T>& img) {
    if (img.h != img.w) throw dimension_error("rotate90: square patch required");
    const std::size_t n = img.h;
    Image<T> out(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) out.at(r, c) = img.at(n - 1 - c, r);
    return out;
}

template <typename T>
Image<T> apply_augmentation(const Image<T>& img, Augmentation a) {
    switch (a) {
        case Augmentation::none: return img;
        case Augmentation::rot90: return rotate90(img);
        case Augmentation::rot180: return rotate90(rotate90(img));
        default: return rotate90(rotate90(rotate90(img)));
    }
}

template <typename T>
std::array<Image<T>, 4> augment_rot(const Image<T>& patch) {
    std::array<Image<T>, 4> out;
    out[0] = patch;
    out[1] = rotate90(patch);
    out[2] = rotate90(out[1]);
    out[3] = rotate90(out[2]);
    return out;
}

// ---------------------------------------------------------------------------
// SR dataset construction

struct SliceStack {
    std::string subject_id;
    std::vector<Image2D> slices;
};

struct SrDatasetOptions {
    SrPairSpec pair;
    std::array<std::size_t, 3> split{21, 4, 3};
    std::uint64_t seed = 0;
    std::size_t roi = 0;  // 0 = use slices as-is
    bool shared_normalization = false;
};

// Subject-level split, then per slice: ROI crop, unit-normalize the HR side,
// Fourier-downsample for the LR side, extract the aligned patch grids,
// rotation-augment training pairs only, write everything under out_dir and
// return the manifest (also written to out_dir/manifest.tsv).
inline Manifest build_sr_dataset(const std::vector<SliceStack>& subjects,
                                 const SrDatasetOptions& opt,
                                 const std::filesystem::path& out_dir) {
    validate(opt.pair);
    if (subjects.empty()) throw config_error("build_sr_dataset: no subjects");
    if (opt.split[0] + opt.split[1] + opt.split[2] != subjects.size())
        throw config_error("build_sr_dataset: split does not match subject count");

    const auto roles = split_subjects(subjects.size(), opt.split, opt.seed);
    std::filesystem::create_directories(out_dir);

    Manifest manifest;
    manifest.dir = out_dir;
    char buf[160];

    for (std::size_t si = 0; si < subjects.size(); ++si) {
        const auto& subject = subjects[si];
        const Role role = roles[si];
        const auto subj_dir = out_dir / subject.subject_id;
        std::filesystem::create_directories(subj_dir);

        for (std::size_t zi = 0; zi < subject.slices.size(); ++zi) {
            Image2D slice = subject.slices[zi];
            if (opt.roi) slice = crop_roi(slice, opt.roi);

            Image2D hr = normalize_unit(slice);
            Image2D lr;
            if (opt.shared_normalization) {
                // LR inherits the HR scaling; ringing overshoot is clamped
                lr = clamp01(fourier_downsample(hr, opt.pair.sr_factor, false));
            } else {
                lr = fourier_downsample(slice, opt.pair.sr_factor, true);
            }

            auto hr_patches = extract_patches(hr, opt.pair.hr_patch, opt.pair.hr_stride);
            auto lr_patches = extract_patches(lr, opt.pair.lr_patch(), opt.pair.lr_stride());
            if (hr_patches.size() != lr_patches.size())
                throw dimension_error("build_sr_dataset: patch grids disagree");

            const auto augmentations = role == Role::train
                                           ? std::vector<Augmentation>{Augmentation::none,
                                                                       Augmentation::rot90,
                                                                       Augmentation::rot180,
                                                                       Augmentation::rot270}
                                           : std::vector<Augmentation>{Augmentation::none};

            for (std::size_t pi = 0; pi < hr_patches.size(); ++pi) {
                for (const auto aug : augmentations) {
                    std::snprintf(buf, sizeof(buf), "%s_s%02zu_p%02zu_%s",
                                  subject.subject_id.c_str(), zi, pi, to_string(aug).c_str());
                    ManifestRecord rec;
                    rec.pair_id = buf;
                    rec.subject_id = subject.subject_id;
                    rec.role = role;
                    rec.augmentation = aug;
                    rec.lq_path = subject.subject_id + "/" + rec.pair_id + "_lr.mrir";
                    rec.hq_path = subject.subject_id + "/" + rec.pair_id + "_hr.mrir";
                    write_image(apply_augmentation(lr_patches[pi].image, aug).cast<float>(),
                                out_dir / rec.lq_path);
                    write_image(apply_augmentation(hr_patches[pi].image, aug).cast<float>(),
                                out_dir / rec.hq_path);
                    manifest.records.push_back(std::move(rec));
                }
            }
        }
    }

    write_manifest(manifest, out_dir / "manifest.tsv");
    return manifest;
}

}  // namespace mrir
