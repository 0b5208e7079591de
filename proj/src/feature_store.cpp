#include "vra/feature_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "vra/errors.hpp"
#include "vra/sequence_sampler.hpp"

namespace vra {

namespace {

constexpr char feature_magic[4] = {'V', 'R', 'A', 'F'};
constexpr std::size_t feature_header_size = 4 + 2 + 4 + 4;

struct FeatureHeader {
    std::uint32_t dim = 0;
    std::uint32_t n_frames = 0;
};

FeatureHeader parse_header(detail::ByteReader& reader, const std::string& context) {
    char magic[4];
    reader.get_bytes(magic, 4);
    if (!std::equal(magic, magic + 4, feature_magic)) {
        throw CorruptionError(context + ": bad magic");
    }
    const auto version = reader.get_u16();
    if (version != feature_file_version) {
        throw VersionError(context + ": unsupported feature file version " + std::to_string(version));
    }
    FeatureHeader h;
    h.dim = reader.get_u32();
    h.n_frames = reader.get_u32();
    if (h.dim == 0 || h.n_frames == 0) {
        throw CorruptionError(context + ": empty feature matrix");
    }
    return h;
}

bool has_feature_magic(std::span<const std::uint8_t> bytes) {
    return bytes.size() >= 4 && std::equal(feature_magic, feature_magic + 4, bytes.begin());
}

Matrix<float> decode_feature_file(std::span<const std::uint8_t> bytes, const std::string& context) {
    detail::ByteReader reader(bytes, context);
    const auto h = parse_header(reader, context);
    const std::size_t expected = std::size_t{h.dim} * h.n_frames * sizeof(float);
    if (reader.remaining() != expected) {
        throw CorruptionError(context + ": payload is " + std::to_string(reader.remaining()) +
                              " bytes, header implies " + std::to_string(expected));
    }
    std::vector<float> values(std::size_t{h.dim} * h.n_frames);
    for (auto& v : values) {
        v = reader.get_f32();
    }
    return Matrix<float>(h.n_frames, h.dim, std::move(values));
}

Matrix<float> parse_text_features(const std::string& text, const std::string& context) {
    std::vector<float> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        std::size_t count = 0;
        const char* p = line.data();
        const char* end = line.data() + line.size();
        while (p < end) {
            while (p < end && (*p == ',' || *p == ' ' || *p == '\t' || *p == ';' || *p == '\r')) {
                ++p;
            }
            if (p >= end) {
                break;
            }
            float v = 0.0f;
            auto [next, ec] = std::from_chars(p, end, v);
            if (ec != std::errc{}) {
                throw DataError(context + ":" + std::to_string(line_no) + ": cannot parse feature value");
            }
            values.push_back(v);
            ++count;
            p = next;
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw DimensionMismatch(context + ":" + std::to_string(line_no) + ": expected " +
                                    std::to_string(cols) + " values, found " + std::to_string(count));
        }
        ++rows;
    }
    if (rows == 0 || cols == 0) {
        throw DataError(context + ": no feature rows");
    }
    return Matrix<float>(rows, cols, std::move(values));
}

void check_entry(const VideoManifestEntry& e, bool require_frame_counts) {
    if (e.video_id.empty()) {
        throw DataError("manifest entry with empty video_id");
    }
    if (!std::isfinite(e.mos_label) || e.mos_label < 1.0 || e.mos_label > 5.0) {
        throw DataError("video '" + e.video_id + "': mos_label " + std::to_string(e.mos_label) +
                        " outside [1, 5]");
    }
    if (require_frame_counts && e.n_frames < 1) {
        throw DataError("video '" + e.video_id + "': n_frames must be at least 1");
    }
}

std::string file_stem_for(std::size_t index, const std::string& video_id) {
    std::string safe;
    for (char c : video_id.substr(0, 64)) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.';
        safe.push_back(ok ? c : '_');
    }
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%06zu_", index);
    return prefix + safe;
}

} // namespace

std::string_view to_string(Split split) noexcept {
    switch (split) {
    case Split::train:
        return "train";
    case Split::test:
        return "test";
    case Split::val:
        return "val";
    case Split::unassigned:
        break;
    }
    return "unassigned";
}

Split parse_split(std::string_view text) {
    if (text == "train") return Split::train;
    if (text == "test") return Split::test;
    if (text == "val") return Split::val;
    if (text == "unassigned" || text.empty()) return Split::unassigned;
    throw DataError("unknown split '" + std::string(text) + "'");
}

// ---------------------------------------------------------------- Manifest

Manifest::Manifest(std::vector<VideoManifestEntry> entries) : m_entries(std::move(entries)) {
    for (const auto& e : m_entries) {
        check_entry(e, false);
    }
    index();
}

void Manifest::index() {
    m_index.clear();
    m_index.reserve(m_entries.size());
    for (std::size_t i = 0; i < m_entries.size(); ++i) {
        if (!m_index.emplace(m_entries[i].video_id, i).second) {
            throw DuplicateIdError("duplicate video_id '" + m_entries[i].video_id + "' in manifest");
        }
    }
}

Manifest Manifest::read(const std::filesystem::path& path, bool require_frame_counts) {
    std::ifstream in(path);
    if (!in) {
        throw NotFoundError("cannot open manifest '" + path.string() + "'");
    }
    std::vector<VideoManifestEntry> entries;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const std::string where = path.string() + ":" + std::to_string(line_no);
        try {
            const auto j = nlohmann::json::parse(line);
            VideoManifestEntry e;
            e.video_id = j.at("video_id").get<std::string>();
            e.mos_label = j.at("mos_label").get<double>();
            if (j.contains("n_frames")) {
                e.n_frames = j.at("n_frames").get<std::uint32_t>();
            } else if (require_frame_counts) {
                throw DataError("missing n_frames");
            }
            e.feature_file = j.at("feature_file").get<std::string>();
            e.split = parse_split(j.value("split", std::string("unassigned")));
            check_entry(e, require_frame_counts);
            entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception& ex) {
            throw DataError(where + ": " + ex.what());
        } catch (const DataError& ex) {
            throw DataError(where + ": " + ex.what());
        }
    }
    return Manifest(std::move(entries));
}

void Manifest::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw DataError("cannot write manifest '" + path.string() + "'");
    }
    for (const auto& e : m_entries) {
        nlohmann::ordered_json j;
        j["video_id"] = e.video_id;
        j["mos_label"] = e.mos_label;
        j["n_frames"] = e.n_frames;
        j["feature_file"] = e.feature_file;
        j["split"] = std::string(to_string(e.split));
        out << j.dump() << '\n';
    }
}

const VideoManifestEntry* Manifest::find(std::string_view video_id) const {
    const auto it = m_index.find(std::string(video_id));
    return it == m_index.end() ? nullptr : &m_entries[it->second];
}

const VideoManifestEntry& Manifest::at(std::string_view video_id) const {
    const auto* e = find(video_id);
    if (e == nullptr) {
        throw NotFoundError("unknown video_id '" + std::string(video_id) + "'");
    }
    return *e;
}

std::vector<std::string> Manifest::ids() const {
    std::vector<std::string> out;
    out.reserve(m_entries.size());
    for (const auto& e : m_entries) {
        out.push_back(e.video_id);
    }
    return out;
}

std::vector<std::string> Manifest::ids(Split split) const {
    std::vector<std::string> out;
    for (const auto& e : m_entries) {
        if (e.split == split) {
            out.push_back(e.video_id);
        }
    }
    return out;
}

void Manifest::set_split(std::string_view video_id, Split split) {
    const auto it = m_index.find(std::string(video_id));
    if (it == m_index.end()) {
        throw NotFoundError("unknown video_id '" + std::string(video_id) + "'");
    }
    m_entries[it->second].split = split;
}

// ------------------------------------------------------------------ splits

SplitAssignment split_dataset(const Manifest& manifest, std::uint64_t seed) {
    if (manifest.empty()) {
        throw DataError("cannot split an empty manifest");
    }
    auto ids = manifest.ids();
    const std::size_t n = ids.size();

    // Fisher-Yates with our own generator so the permutation is identical on every platform.
    RngStream rng(mix64(seed ^ 0x5350'4C49'5400'0000ULL));
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.uniform_below(i + 1));
        std::swap(ids[i], ids[j]);
    }

    // Integer arithmetic keeps 0.7 * 700 == 490 exact.
    const std::size_t n_train = n * 7 / 10;
    const std::size_t n_test = n * 2 / 10;

    SplitAssignment out;
    out.seed = seed;
    out.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train),
                        ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_test));
    out.val_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train + n_test), ids.end());
    return out;
}

void apply_split(Manifest& manifest, const SplitAssignment& assignment) {
    for (const auto& id : manifest.ids()) {
        manifest.set_split(id, Split::unassigned);
    }
    for (const auto& id : assignment.train_ids) manifest.set_split(id, Split::train);
    for (const auto& id : assignment.test_ids) manifest.set_split(id, Split::test);
    for (const auto& id : assignment.val_ids) manifest.set_split(id, Split::val);
}

SplitAssignment splits_from_manifest(const Manifest& manifest) {
    SplitAssignment out;
    out.train_ids = manifest.ids(Split::train);
    out.test_ids = manifest.ids(Split::test);
    out.val_ids = manifest.ids(Split::val);
    return out;
}

// ------------------------------------------------------------ feature files

void write_feature_file(const std::filesystem::path& path, const Matrix<float>& values) {
    if (values.rows() == 0 || values.cols() == 0) {
        throw DataError("refusing to write an empty feature matrix to '" + path.string() + "'");
    }
    detail::ByteWriter w;
    w.reserve(feature_header_size + values.size() * sizeof(float));
    w.put_bytes(feature_magic, 4);
    w.put_u16(feature_file_version);
    w.put_u32(static_cast<std::uint32_t>(values.cols()));
    w.put_u32(static_cast<std::uint32_t>(values.rows()));
    for (float v : values.values()) {
        w.put_f32(v);
    }
    detail::write_file_bytes(path, w.bytes());
}

Matrix<float> read_feature_file(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    return decode_feature_file(bytes, path.string());
}

Matrix<float> read_raw_features(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    if (has_feature_magic(bytes)) {
        return decode_feature_file(bytes, path.string());
    }
    return parse_text_features(std::string(bytes.begin(), bytes.end()), path.string());
}

// ------------------------------------------------------------- FeatureStore

FeatureStore::FeatureStore(std::filesystem::path root, Manifest manifest, std::size_t dim)
    : m_root(std::move(root)), m_manifest(std::move(manifest)), m_dim(dim) {}

FeatureStore FeatureStore::open(const std::filesystem::path& root) {
    auto manifest = Manifest::read(root / manifest_name);
    std::size_t dim = 0;
    if (!manifest.empty()) {
        const auto& first = manifest.entries().front();
        const auto path = root / first.feature_file;
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            throw NotFoundError("feature file for '" + first.video_id + "' missing: " + path.string());
        }
        std::uint8_t header[feature_header_size];
        in.read(reinterpret_cast<char*>(header), feature_header_size);
        detail::ByteReader reader(std::span<const std::uint8_t>(header, static_cast<std::size_t>(in.gcount())),
                                  path.string());
        dim = parse_header(reader, path.string()).dim;
    }
    return FeatureStore(root, std::move(manifest), dim);
}

FrameFeatureMatrix FeatureStore::load(std::string_view video_id) const {
    const auto& entry = m_manifest.at(video_id);
    const auto path = m_root / entry.feature_file;
    if (!std::filesystem::exists(path)) {
        throw NotFoundError("feature file for '" + entry.video_id + "' missing: " + path.string());
    }
    auto values = read_feature_file(path);
    if (values.cols() != m_dim || values.rows() != entry.n_frames) {
        throw CorruptionError("feature file for '" + entry.video_id + "' is " + std::to_string(values.rows()) +
                              "x" + std::to_string(values.cols()) + ", manifest says " +
                              std::to_string(entry.n_frames) + "x" + std::to_string(m_dim));
    }
    return FrameFeatureMatrix{entry.video_id, std::move(values)};
}

std::vector<FrameFeatureMatrix> FeatureStore::load_many(std::span<const std::string> video_ids) const {
    std::vector<FrameFeatureMatrix> out;
    out.reserve(video_ids.size());
    for (const auto& id : video_ids) {
        out.push_back(load(id));
    }
    return out;
}

void FeatureStore::save_split(const SplitAssignment& assignment) {
    apply_split(m_manifest, assignment);
    m_manifest.write(m_root / manifest_name);
}

// ------------------------------------------------------- FeatureStoreWriter

FeatureStoreWriter::FeatureStoreWriter(std::filesystem::path root) : m_root(std::move(root)) {
    std::filesystem::create_directories(m_root / "features");
}

void FeatureStoreWriter::add(VideoManifestEntry entry, const Matrix<float>& values) {
    if (m_seen.contains(entry.video_id)) {
        throw DuplicateIdError("duplicate video_id '" + entry.video_id + "'");
    }
    if (values.rows() == 0 || values.cols() == 0) {
        throw DataError("video '" + entry.video_id + "' has no feature values");
    }
    if (m_dim && *m_dim != values.cols()) {
        throw DimensionMismatch("video '" + entry.video_id + "' has dim " + std::to_string(values.cols()) +
                                ", store dim is " + std::to_string(*m_dim));
    }
    const auto vals = values.values();
    if (const auto bad = std::find_if(vals.begin(), vals.end(), [](float v) { return !std::isfinite(v); });
        bad != vals.end()) {
        const auto idx = static_cast<std::size_t>(bad - vals.begin());
        throw DataError("video '" + entry.video_id + "' has a non-finite feature at frame " +
                             std::to_string(idx / values.cols()) + ", dim " + std::to_string(idx % values.cols()));
    }
    entry.n_frames = static_cast<std::uint32_t>(values.rows());
    check_entry(entry, true);

    const auto index = m_entries.size();
    entry.feature_file = "features/" + file_stem_for(index, entry.video_id) + ".vraf";
    write_feature_file(m_root / entry.feature_file, values);

    m_dim = values.cols();
    m_seen.emplace(entry.video_id, index);
    m_entries.push_back(std::move(entry));
}

FeatureStore FeatureStoreWriter::finish() {
    Manifest manifest(m_entries);
    manifest.write(m_root / FeatureStore::manifest_name);
    return FeatureStore::open(m_root);
}

FeatureStore ingest_features(const std::filesystem::path& manifest_path,
                             const std::filesystem::path& raw_feature_dir,
                             const std::filesystem::path& store_dir) {
    const auto input = Manifest::read(manifest_path, false);
    FeatureStoreWriter writer(store_dir);
    for (const auto& entry : input.entries()) {
        const auto raw_path = raw_feature_dir / entry.feature_file;
        if (!std::filesystem::exists(raw_path)) {
            throw NotFoundError("video '" + entry.video_id + "': raw feature file missing: " + raw_path.string());
        }
        auto values = read_raw_features(raw_path);
        if (entry.n_frames != 0 && entry.n_frames != values.rows()) {
            throw DataError("video '" + entry.video_id + "': manifest says " + std::to_string(entry.n_frames) +
                            " frames, file has " + std::to_string(values.rows()));
        }
        writer.add(entry, values);
    }
    return writer.finish();
}

} // namespace vra
