#include "irs/fusion.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <thread>

namespace irs {

std::vector<RoomWorkQueue> partition_observations(std::span<MaskObservation> obs,
                                                  const RoomSet& rooms) {
  if (rooms.empty()) throw Error("no rooms segmented");
  std::vector<RoomWorkQueue> queues(rooms.rooms.size());
  for (size_t r = 0; r < rooms.rooms.size(); ++r) queues[r].room_id = rooms.rooms[r].id;
  for (size_t i = 0; i < obs.size(); ++i) {
    const int room = assign_room(obs[i].centroid(), rooms);
    obs[i].room_id = room;
    for (auto& q : queues) {
      if (q.room_id == room) {
        q.observations.push_back(i);
        break;
      }
    }
  }
  std::erase_if(queues, [](const RoomWorkQueue& q) { return q.observations.empty(); });
  std::sort(queues.begin(), queues.end(),
            [](const RoomWorkQueue& a, const RoomWorkQueue& b) { return a.room_id < b.room_id; });
  return queues;
}

CriteriaResult dual_criteria(const Instance& inst, const VoxelSet& obs_voxels,
                             const Embedding& obs_embedding, const Config& cfg) {
  CriteriaResult r;
  r.i1 = voxel_overlap(inst.voxels, obs_voxels);
  r.i2 = cosine(inst.embedding, obs_embedding);
  r.merge = r.i1 >= cfg.tau_geometric && r.i2 >= cfg.tau_semantic;
  return r;
}

CriteriaResult dual_criteria(const Instance& inst, const MaskObservation& obs, const Config& cfg) {
  return dual_criteria(inst, voxelize(obs.points, inst.voxels.voxel_size()), obs.fused, cfg);
}

std::string_view to_string(FusionLogEntry::Decision d) {
  switch (d) {
    case FusionLogEntry::Decision::kMerge: return "merge";
    case FusionLogEntry::Decision::kPass: return "pass";
    case FusionLogEntry::Decision::kReject: return "reject";
    case FusionLogEntry::Decision::kNew: return "new";
  }
  return "?";
}

std::string format_log_entry(const FusionLogEntry& e) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d %d %d %.6f %.6f %s", e.frame_id, e.mask_id, e.candidate,
                e.i1, e.i2, std::string(to_string(e.decision)).c_str());
  return buf;
}

// ---------------------------------------------------------------------------
// InstanceMemory

std::vector<int> InstanceMemory::candidates(const VoxelSet& voxels) const {
  std::vector<int> out;
  for (const VoxelKey& k : voxels.cells()) {
    auto it = index_.find(k);
    if (it == index_.end()) continue;
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int InstanceMemory::create(const MaskObservation& obs, VoxelSet voxels, int room_id,
                           size_t obs_position) {
  const int id = static_cast<int>(instances_.size());
  Instance inst;
  inst.id = id;
  inst.points = obs.points;
  inst.bbox = compute_aabb(obs.points);
  inst.weight = static_cast<int64_t>(obs.points.size());
  inst.room_id = room_id;
  inst.embedding = obs.fused;
  for (const VoxelKey& k : voxels.cells()) index_[k].push_back(id);
  inst.voxels = std::move(voxels);
  features_.emplace_back(obs.fused, inst.weight);
  instances_.push_back(std::move(inst));
  first_obs_.push_back(obs_position);
  members_.push_back({{obs.frame_id, obs.mask_id}});
  return id;
}

void InstanceMemory::absorb(int id, const MaskObservation& obs, const VoxelSet& voxels) {
  Instance& inst = instances_[static_cast<size_t>(id)];
  for (const VoxelKey& k : voxels.cells()) {
    if (!inst.voxels.contains(k)) index_[k].push_back(id);
  }
  inst.voxels.merge(voxels);
  inst.points.insert(inst.points.end(), obs.points.begin(), obs.points.end());
  for (const auto& p : obs.points) inst.bbox.extend(p);
  const auto n = static_cast<int64_t>(obs.points.size());
  inst.weight += n;
  features_[static_cast<size_t>(id)].add(obs.fused, n);
  inst.embedding = features_[static_cast<size_t>(id)].unit();
  members_[static_cast<size_t>(id)].emplace_back(obs.frame_id, obs.mask_id);
}

bool InstanceMemory::index_consistent() const {
  size_t entries = 0;
  for (const auto& [key, ids] : index_) {
    for (int id : ids) {
      if (id < 0 || static_cast<size_t>(id) >= instances_.size()) return false;
      if (!instances_[static_cast<size_t>(id)].voxels.contains(key)) return false;
    }
    std::vector<int> sorted = ids;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return false;
    entries += ids.size();
  }
  size_t expected = 0;
  for (const auto& inst : instances_) expected += inst.voxels.size();
  return entries == expected;
}

// ---------------------------------------------------------------------------
// Fusion

InstanceMemory fuse_room(const RoomWorkQueue& queue, std::span<const MaskObservation> obs,
                         const Config& cfg, std::vector<FusionLogEntry>* log) {
  InstanceMemory memory(cfg.voxel_size);
  std::vector<int> all_ids;
  for (size_t pos : queue.observations) {
    const MaskObservation& o = obs[pos];
    if (o.points.empty()) continue;
    VoxelSet voxels = voxelize(o.points, cfg.voxel_size);

    // Instances sharing no voxel have zero overlap and can only pass when
    // the geometric threshold is zero.
    std::vector<int> cands;
    if (cfg.tau_geometric > 0.0) {
      cands = memory.candidates(voxels);
    } else {
      all_ids.resize(memory.instances().size());
      std::iota(all_ids.begin(), all_ids.end(), 0);
      cands = all_ids;
    }

    int best = -1;
    double best_score = -1.0;
    const size_t log_start = log ? log->size() : 0;
    for (int id : cands) {
      const CriteriaResult c =
          dual_criteria(memory.instances()[static_cast<size_t>(id)], voxels, o.fused, cfg);
      if (c.merge && c.i1 * c.i2 > best_score) {
        best = id;
        best_score = c.i1 * c.i2;
      }
      if (log) {
        log->push_back({o.frame_id, o.mask_id, queue.room_id, id, c.i1, c.i2,
                        c.merge ? FusionLogEntry::Decision::kPass
                                : FusionLogEntry::Decision::kReject});
      }
    }
    if (best >= 0) {
      if (log) {
        for (size_t i = log_start; i < log->size(); ++i) {
          if ((*log)[i].candidate == best) (*log)[i].decision = FusionLogEntry::Decision::kMerge;
        }
      }
      memory.absorb(best, o, voxels);
    } else {
      const int room = queue.room_id >= 0 ? queue.room_id : o.room_id.value_or(-1);
      const int id = memory.create(o, std::move(voxels), room, pos);
      if (log) {
        log->push_back({o.frame_id, o.mask_id, queue.room_id, id, 0.0, 0.0,
                        FusionLogEntry::Decision::kNew});
      }
    }
  }
  return memory;
}

std::string_view to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::kParallel: return "parallel";
    case FusionMode::kSerialRooms: return "serial_rooms";
    case FusionMode::kSerialGlobal: return "serial_global";
  }
  return "?";
}

std::optional<FusionMode> parse_fusion_mode(std::string_view name) {
  for (auto m : {FusionMode::kParallel, FusionMode::kSerialRooms, FusionMode::kSerialGlobal}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

namespace {

struct RoomOutput {
  std::vector<Instance> instances;
  std::vector<size_t> first_obs;
  std::vector<std::vector<ObservationKey>> members;
  std::vector<FusionLogEntry> log;
};

RoomOutput run_queue(const RoomWorkQueue& queue, std::span<const MaskObservation> obs,
                     const Config& cfg, bool with_log) {
  RoomOutput out;
  InstanceMemory memory = fuse_room(queue, obs, cfg, with_log ? &out.log : nullptr);
  out.first_obs = memory.first_observation();
  out.members = memory.members();
  out.instances = std::move(memory).take_instances();
  return out;
}

// Orders instances by (room id, position of first observation), renumbers
// them densely and rewrites log candidate ids accordingly.
FusionResult collect(std::vector<RoomOutput> outputs) {
  struct Slot {
    int room;
    size_t first;
    size_t out;
    size_t local;
  };
  std::vector<Slot> slots;
  for (size_t o = 0; o < outputs.size(); ++o) {
    for (size_t i = 0; i < outputs[o].instances.size(); ++i) {
      slots.push_back({outputs[o].instances[i].room_id, outputs[o].first_obs[i], o, i});
    }
  }
  std::sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return std::tie(a.room, a.first) < std::tie(b.room, b.first);
  });
  std::vector<std::vector<int>> remap(outputs.size());
  for (size_t o = 0; o < outputs.size(); ++o) remap[o].assign(outputs[o].instances.size(), -1);
  FusionResult result;
  result.instances.reserve(slots.size());
  for (size_t n = 0; n < slots.size(); ++n) {
    const Slot& s = slots[n];
    remap[s.out][s.local] = static_cast<int>(n);
    Instance inst = std::move(outputs[s.out].instances[s.local]);
    inst.id = static_cast<int>(n);
    result.instances.push_back(std::move(inst));
    result.members.push_back(std::move(outputs[s.out].members[s.local]));
  }
  for (size_t o = 0; o < outputs.size(); ++o) {
    for (auto& e : outputs[o].log) {
      if (e.candidate >= 0) e.candidate = remap[o][static_cast<size_t>(e.candidate)];
      result.log.push_back(e);
    }
  }
  std::stable_sort(result.log.begin(), result.log.end(),
                   [](const FusionLogEntry& a, const FusionLogEntry& b) {
                     return std::tie(a.frame_id, a.mask_id) < std::tie(b.frame_id, b.mask_id);
                   });
  return result;
}

}  // namespace

FusionResult fuse_all(const std::vector<RoomWorkQueue>& queues,
                      std::span<const MaskObservation> obs, const Config& cfg, FusionMode mode,
                      bool with_log) {
  std::vector<RoomOutput> outputs(queues.size());
  const size_t workers =
      mode == FusionMode::kSerialRooms
          ? 1
          : std::min(static_cast<size_t>(std::max(cfg.workers, 1)), queues.size());
  if (workers <= 1) {
    for (size_t q = 0; q < queues.size(); ++q) outputs[q] = run_queue(queues[q], obs, cfg, with_log);
    return collect(std::move(outputs));
  }

  // Largest queues first; each queue is owned by exactly one worker and
  // writes only its own output slot.
  std::vector<size_t> order(queues.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return queues[a].observations.size() > queues[b].observations.size();
  });
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t k = next.fetch_add(1); k < order.size(); k = next.fetch_add(1)) {
        outputs[order[k]] = run_queue(queues[order[k]], obs, cfg, with_log);
      }
    });
  }
  for (auto& t : pool) t.join();
  return collect(std::move(outputs));
}

FusionResult fuse_global(std::span<MaskObservation> obs, const RoomSet& rooms, const Config& cfg,
                         bool with_log) {
  if (rooms.empty()) throw Error("no rooms segmented");
  RoomWorkQueue global;
  global.observations.resize(obs.size());
  std::iota(global.observations.begin(), global.observations.end(), 0);
  RoomOutput out = run_queue(global, obs, cfg, with_log);
  for (size_t i = 0; i < out.instances.size(); ++i) {
    const MaskObservation& first = obs[out.first_obs[i]];
    out.instances[i].room_id = first.room_id ? *first.room_id : assign_room(first.centroid(), rooms);
  }
  for (auto& e : out.log) {
    if (e.candidate >= 0) e.room_id = out.instances[static_cast<size_t>(e.candidate)].room_id;
  }
  std::vector<RoomOutput> outputs;
  outputs.push_back(std::move(out));
  return collect(std::move(outputs));
}

FusionResult run_fusion(std::span<MaskObservation> obs, const RoomSet& rooms, const Config& cfg,
                        FusionMode mode, bool with_log) {
  if (mode == FusionMode::kSerialGlobal) return fuse_global(obs, rooms, cfg, with_log);
  const auto queues = partition_observations(obs, rooms);
  return fuse_all(queues, obs, cfg, mode, with_log);
}

std::vector<std::vector<ObservationKey>> instance_partition(const FusionResult& result) {
  std::vector<std::vector<ObservationKey>> groups = result.members;
  for (auto& g : groups) std::sort(g.begin(), g.end());
  std::sort(groups.begin(), groups.end());
  return groups;
}

}  // namespace irs
