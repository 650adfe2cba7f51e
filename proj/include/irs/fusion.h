#pragma once

// Room-partitioned instance fusion. Each observation is matched against the
// instances of its own room through a voxel index and merged only when both
// the geometric overlap and the embedding similarity pass their thresholds.

#include "irs/model.h"
#include "irs/roomseg.h"
#include "irs/semantics.h"

#include <span>
#include <string>
#include <optional>
#include <unordered_map>
#include <vector>

namespace irs {

struct RoomWorkQueue {
  int room_id = -1;
  /// Indices into the observation list handed to partition_observations,
  /// ascending (frame order).
  std::vector<size_t> observations;
};

/// Assigns every observation to a room by its centroid (writes obs.room_id)
/// and returns one queue per room that received work, ordered by room id.
std::vector<RoomWorkQueue> partition_observations(std::span<MaskObservation> obs,
                                                  const RoomSet& rooms);

struct CriteriaResult {
  bool merge = false;
  double i1 = 0.0;  // voxel overlap
  double i2 = 0.0;  // embedding cosine
};

CriteriaResult dual_criteria(const Instance& inst, const MaskObservation& obs, const Config& cfg);
CriteriaResult dual_criteria(const Instance& inst, const VoxelSet& obs_voxels,
                             const Embedding& obs_embedding, const Config& cfg);

struct FusionLogEntry {
  enum class Decision : uint8_t { kMerge, kPass, kReject, kNew };
  int frame_id = 0;
  int mask_id = 0;
  int room_id = -1;
  int candidate = -1;  // instance id (per-room creation index until fuse_all remaps)
  double i1 = 0.0;
  double i2 = 0.0;
  Decision decision = Decision::kReject;
};

std::string_view to_string(FusionLogEntry::Decision d);
std::string format_log_entry(const FusionLogEntry& e);

/// Instances of one room plus the voxel -> instance inverted index.
class InstanceMemory {
 public:
  explicit InstanceMemory(double voxel_size) : voxel_size_(voxel_size) {}

  const std::vector<Instance>& instances() const { return instances_; }
  /// Position (in the caller's observation list) of each instance's first observation.
  const std::vector<size_t>& first_observation() const { return first_obs_; }
  /// (frame_id, mask_id) of every observation merged into each instance.
  const std::vector<std::vector<std::pair<int, int>>>& members() const { return members_; }

  /// Instance ids sharing at least one voxel with `voxels`, ascending.
  std::vector<int> candidates(const VoxelSet& voxels) const;

  int create(const MaskObservation& obs, VoxelSet voxels, int room_id, size_t obs_position);
  void absorb(int id, const MaskObservation& obs, const VoxelSet& voxels);

  /// True when the index is exactly the inverse of the instance voxel sets.
  bool index_consistent() const;

  std::vector<Instance> take_instances() && { return std::move(instances_); }

 private:
  double voxel_size_;
  std::vector<Instance> instances_;
  std::vector<EmbeddingAccumulator> features_;
  std::vector<size_t> first_obs_;
  std::vector<std::vector<std::pair<int, int>>> members_;
  std::unordered_map<VoxelKey, std::vector<int>, VoxelKeyHash> index_;
};

/// Fuses one queue in order. `obs` is the list the queue indexes into.
InstanceMemory fuse_room(const RoomWorkQueue& queue, std::span<const MaskObservation> obs,
                         const Config& cfg, std::vector<FusionLogEntry>* log = nullptr);

enum class FusionMode : uint8_t { kParallel, kSerialRooms, kSerialGlobal };
std::string_view to_string(FusionMode mode);
std::optional<FusionMode> parse_fusion_mode(std::string_view name);

using ObservationKey = std::pair<int, int>;  // (frame_id, mask_id)

struct FusionResult {
  std::vector<Instance> instances;
  std::vector<std::vector<ObservationKey>> members;  // aligned with instances
  std::vector<FusionLogEntry> log;
};

/// Fuses queues independently on cfg.workers threads (one thread when
/// `mode` is kSerialRooms). Final ids follow (room id, first observation).
FusionResult fuse_all(const std::vector<RoomWorkQueue>& queues,
                      std::span<const MaskObservation> obs, const Config& cfg,
                      FusionMode mode = FusionMode::kParallel, bool with_log = false);

/// One queue holding every observation, rooms ignored during matching. Each
/// instance takes the room of its first observation.
FusionResult fuse_global(std::span<MaskObservation> obs, const RoomSet& rooms, const Config& cfg,
                         bool with_log = false);

/// Partition + fuse_all, or fuse_global, depending on `mode`.
FusionResult run_fusion(std::span<MaskObservation> obs, const RoomSet& rooms, const Config& cfg,
                        FusionMode mode, bool with_log = false);

/// Partition of observations into instances as sorted groups; comparable
/// across modes and id labelings.
std::vector<std::vector<ObservationKey>> instance_partition(const FusionResult& result);

}  // namespace irs
