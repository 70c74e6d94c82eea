#pragma once

// Cross-section test items: pick the contour of a slice (category 1), the
// plane behind a contour (category 2) or the contour sequence of a stack of
// slices (category 3), with seeded plane-perturbation distractors.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "slicetrain/geometry.hpp"

namespace slicetrain {

inline constexpr double kDistinctThreshold = 0.15;
inline constexpr double kMatchTolerance = 0.05;
inline constexpr int kDistractorAttempts = 64;

// Scale-free summary of a slice used to compare contours.
struct ContourSignature {
    std::size_t loop_count = 0;
    double area = 0.0;        // material area (holes subtract)
    double axis_ratio = 1.0;  // of the largest loop

    bool operator==(const ContourSignature&) const = default;
};

ContourSignature signature(const CrossSection& cs);

// max(relative area difference, relative axis-ratio difference), or 1 when
// the loop counts differ.
double contour_distance(const ContourSignature& a, const ContourSignature& b);
// Largest per-position distance; 1 for sequences of different length.
double sequence_distance(const std::vector<ContourSignature>& a, const std::vector<ContourSignature>& b);

// Immutable set of named meshes with their edge tables.
class ShapeLibrary {
public:
    explicit ShapeLibrary(std::vector<std::string> names);
    ShapeLibrary();  // every named shape

    const std::vector<std::string>& names() const { return names_; }
    bool contains(const std::string& name) const { return meshes_.count(name) != 0; }
    const LabeledMesh& mesh(const std::string& name) const;  // InvalidSpec
    const MeshTopology& topology(const std::string& name) const;
    Vec3 center(const std::string& name) const;
    CrossSection slice(const std::string& name, const Plane& plane) const;

private:
    std::vector<std::string> names_;
    std::map<std::string, LabeledMesh> meshes_;
    std::map<std::string, MeshTopology> topologies_;
};

// One answer choice. Category 1: a single contour (shape + plane). Category
// 2: a single plane on the stimulus shape. Category 3: a contour sequence.
struct ItemOption {
    std::vector<std::string> shape_ids;
    std::vector<Plane> planes;
    std::vector<ContourSignature> signatures;
};

struct TestItem {
    std::string item_id;
    int category = 1;
    std::string shape_id;
    std::vector<Plane> stimulus_planes;
    std::vector<ItemOption> options;
    std::size_t correct = 0;
    std::uint64_t seed = 0;
    std::string control_of;  // non-empty for consistency-check duplicates
};

// PreconditionViolation for n_options < 3, an empty stimulus slice or a short
// plane sequence; DistinctnessUnreachable when a distractor slot exhausts its
// attempts.
TestItem gen_item_cat1(const ShapeLibrary& lib, const std::string& shape_id, const Plane& plane, int n_options,
                       std::uint64_t seed);
TestItem gen_item_cat2(const ShapeLibrary& lib, const std::string& shape_id, const Plane& target_plane,
                       int n_options, std::uint64_t seed);
TestItem gen_item_cat3(const ShapeLibrary& lib, const std::string& shape_id, const std::vector<Plane>& planes,
                       int n_options, std::uint64_t seed);

struct ItemCheck {
    bool sound = true;
    std::vector<std::string> problems;
};

// Re-slices stimulus and options: the keyed option must match within
// kMatchTolerance and every other option must be at least kDistinctThreshold
// away from the stimulus and from each other.
ItemCheck verify_item(const ShapeLibrary& lib, const TestItem& item);

struct BankConfig {
    int category1 = 12;
    int category2 = 6;
    int category3 = 4;
    int controls = 4;  // duplicated items with reshuffled options
    int n_options = 4;
    std::uint64_t seed = 1;
    std::vector<std::string> shapes{"hourglass", "taper", "y_branch", "potato_hole", "sphere", "cylinder", "torus"};
};

std::vector<TestItem> generate_bank(const ShapeLibrary& lib, const BankConfig& config);

nlohmann::json to_json(const Plane& plane);
nlohmann::json to_json(const ContourSignature& sig);
nlohmann::json to_json(const TestItem& item);
nlohmann::json bank_manifest(const std::vector<TestItem>& items, const BankConfig& config);

// Writes manifest.json plus one SVG per option contour (and the category 2
// stimulus); returns the written paths.
std::vector<std::filesystem::path> export_bank(const ShapeLibrary& lib, const std::vector<TestItem>& items,
                                               const BankConfig& config, const std::filesystem::path& dir);

}  // namespace slicetrain
