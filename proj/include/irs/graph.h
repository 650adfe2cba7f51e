#pragma once

// Three-level scene graph (building -> rooms -> instances): assembly,
// validation and the `.sg` / `.sgp` file pair.

#include "irs/model.h"
#include "irs/roomseg.h"
#include "irs/semantics.h"

#include <string>
#include <vector>

namespace irs {

inline constexpr const char* kUnknownRoomLabel = "unknown";

struct GraphBuildReport {
  std::vector<std::string> warnings;
};

/// Attaches each instance to the room with the largest xy box overlap
/// (fusion room as fallback), labels rooms from volume-weighted instance
/// features and adds belongs-to edges. Instance points are rounded to float
/// precision so the graph survives a save/load cycle unchanged.
SceneGraph build_graph(RoomSet rooms, std::vector<Instance> instances,
                       const PrototypeSet& prototypes, double voxel_size,
                       GraphBuildReport* report = nullptr);

/// Lists every invariant violation; empty for a well-formed graph.
std::vector<std::string> validate(const SceneGraph& graph);

struct SerializedGraph {
  std::string manifest;  // UTF-8 structure document
  std::string blob;      // little-endian float32 point data
};

SerializedGraph serialize(const SceneGraph& graph);
/// Throws Error naming the byte offset and field path of the first problem.
SceneGraph deserialize(const SerializedGraph& data);

/// `path` may be given with or without the `.sg` suffix.
void save_graph(const SceneGraph& graph, const std::string& path);
SceneGraph load_graph(const std::string& path);

}  // namespace irs
