#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vra/matrix.hpp"

namespace vra {

enum class Split { train, test, val, unassigned };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

/// One line of a manifest: a video, its MOS label and where its features live.
struct VideoManifestEntry {
    std::string video_id;
    double mos_label = 0.0;
    std::uint32_t n_frames = 0;
    std::string feature_file;
    Split split = Split::unassigned;

    bool operator==(const VideoManifestEntry&) const = default;
};

/// Per-frame backbone features of one video, n_frames x dim, stored as binary32.
struct FrameFeatureMatrix {
    std::string video_id;
    Matrix<float> values;

    std::size_t dim() const noexcept { return values.cols(); }
    std::size_t n_frames() const noexcept { return values.rows(); }
};

/// Ordered collection of manifest entries with unique ids.
///
/// On disk a manifest is JSON Lines: one object per line with the fields
/// `video_id`, `mos_label`, `n_frames`, `feature_file` and `split`.
class Manifest {
public:
    Manifest() = default;
    explicit Manifest(std::vector<VideoManifestEntry> entries);

    /// Parses a manifest. When `require_frame_counts` is false, `n_frames`
    /// may be omitted (it is then 0 and filled in by ingestion).
    static Manifest read(const std::filesystem::path& path, bool require_frame_counts = true);
    void write(const std::filesystem::path& path) const;

    const std::vector<VideoManifestEntry>& entries() const noexcept { return m_entries; }
    std::size_t size() const noexcept { return m_entries.size(); }
    bool empty() const noexcept { return m_entries.empty(); }

    const VideoManifestEntry* find(std::string_view video_id) const;
    const VideoManifestEntry& at(std::string_view video_id) const;
    std::vector<std::string> ids() const;
    std::vector<std::string> ids(Split split) const;

    void set_split(std::string_view video_id, Split split);

private:
    void index();

    std::vector<VideoManifestEntry> m_entries;
    std::unordered_map<std::string, std::size_t> m_index;
};

/// Train/test/validation partition of a manifest's ids.
struct SplitAssignment {
    static constexpr double train_ratio = 0.7;
    static constexpr double test_ratio = 0.2;
    static constexpr double val_ratio = 0.1;

    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::vector<std::string> val_ids;
    std::uint64_t seed = 0;

    bool operator==(const SplitAssignment&) const = default;
};

/// Seeded unstratified 70/20/10 split: train = floor(0.7 N), test = floor(0.2 N),
/// validation takes the remainder.
SplitAssignment split_dataset(const Manifest& manifest, std::uint64_t seed);

/// Writes the assignment into the manifest's `split` fields. Ids not in the
/// assignment become `unassigned`.
void apply_split(Manifest& manifest, const SplitAssignment& assignment);

/// Reads the assignment recorded in a manifest's `split` fields.
SplitAssignment splits_from_manifest(const Manifest& manifest);

// Binary feature file: "VRAF", u16 version, u32 dim, u32 n_frames, then
// n_frames*dim little-endian binary32 values, row-major.
inline constexpr std::uint16_t feature_file_version = 1;

void write_feature_file(const std::filesystem::path& path, const Matrix<float>& values);
Matrix<float> read_feature_file(const std::filesystem::path& path);

/// Reads a raw per-frame feature file: either a binary feature file (detected
/// by its magic) or delimited text with one frame per line.
Matrix<float> read_raw_features(const std::filesystem::path& path);

/// A directory holding `manifest.jsonl` and one binary feature file per video.
///
/// Reads are const and safe from multiple threads.
class FeatureStore {
public:
    static constexpr std::string_view manifest_name = "manifest.jsonl";

    static FeatureStore open(const std::filesystem::path& root);

    const std::filesystem::path& root() const noexcept { return m_root; }
    const Manifest& manifest() const noexcept { return m_manifest; }
    std::size_t dim() const noexcept { return m_dim; }

    FrameFeatureMatrix load(std::string_view video_id) const;
    std::vector<FrameFeatureMatrix> load_many(std::span<const std::string> video_ids) const;

    /// Replaces the split fields and rewrites the manifest on disk.
    void save_split(const SplitAssignment& assignment);

private:
    FeatureStore(std::filesystem::path root, Manifest manifest, std::size_t dim);

    std::filesystem::path m_root;
    Manifest m_manifest;
    std::size_t m_dim = 0;
};

/// Single-writer builder for a feature store directory.
class FeatureStoreWriter {
public:
    explicit FeatureStoreWriter(std::filesystem::path root);

    /// Validates and writes one video. `n_frames` and `feature_file` of the
    /// entry are derived from the matrix and ignored if set.
    void add(VideoManifestEntry entry, const Matrix<float>& values);

    /// Writes the manifest and reopens the result as a store.
    FeatureStore finish();

private:
    std::filesystem::path m_root;
    std::vector<VideoManifestEntry> m_entries;
    std::unordered_map<std::string, std::size_t> m_seen;
    std::optional<std::size_t> m_dim;
};

/// Builds a store from an input manifest whose `feature_file` fields are
/// relative to `raw_feature_dir`.
FeatureStore ingest_features(const std::filesystem::path& manifest_path,
                             const std::filesystem::path& raw_feature_dir,
                             const std::filesystem::path& store_dir);

} // namespace vra
