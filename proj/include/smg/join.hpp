#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "smg/reinterp.hpp"
#include "smg/smg.hpp"

namespace smg {

enum class JoinOutcome : std::uint8_t { Ok, Retry, Fail };

/// Node correspondences and status threaded through one join. Side 0 is the
/// left input, side 1 the right one. Both sides and the destination may be the
/// same graph (merging within one heap).
struct JoinContext {
    std::array<Smg*, 2> src{};
    Smg* dst = nullptr;
    std::array<std::map<std::uint32_t, std::uint32_t>, 2> fwd;
    std::array<std::map<std::uint32_t, std::uint32_t>, 2> back;
    JoinStatus status = JoinStatus::Equal;
    bool same_graph = false;

    std::optional<std::uint32_t> image(int side, std::uint32_t n) const;
    std::optional<std::uint32_t> preimage(int side, std::uint32_t n) const;
    void map(int side, std::uint32_t from, std::uint32_t to);
    /// Drops every correspondence whose image is not in `keep`.
    void prune(const std::function<bool(std::uint32_t)>& keep);
};

struct JoinStep {
    JoinOutcome outcome = JoinOutcome::Fail;
    ValueId value = kZero;
};

bool join_sub_smgs(JoinContext& ctx, ObjectId o1, ObjectId o2, ObjectId o, int ldiff,
                   const std::vector<ByteRange>& dest_links = {});
std::optional<ValueId> join_values(JoinContext& ctx, ValueId v1, ValueId v2, int ldiff);
JoinStep join_target_objects(JoinContext& ctx, ValueId a1, ValueId a2, int ldiff);
ValueId map_target_address(JoinContext& ctx, ValueId a1, ValueId a2);
std::optional<JoinStatus> match_objects(const JoinContext& ctx, JoinStatus s, ObjectId o1, ObjectId o2);
/// Joins `a1`, `a2` as if an empty segment preceded the other side's target.
/// `side` 0 inserts the left segment into the right graph.
JoinStep insert_segment_and_join(JoinContext& ctx, int side, ValueId a1, ValueId a2, int ldiff);

struct JoinedSpc {
    JoinStatus status;
    Spc spc;
};
std::optional<JoinedSpc> join_spcs(const Spc& c1, const Spc& c2);

/// True when every heap of `c2` is a heap of `c1` according to the join status.
bool entails(const Spc& c1, const Spc& c2);

struct MergeResult {
    JoinStatus status = JoinStatus::Equal;
    Smg g;
    ObjectId d = kNullObject;
    /// Source nodes below each merged object, the object itself included.
    NodeSet left_src, right_src;
    /// Destination nodes created below the new segment, the segment excluded.
    NodeSet nested;
};

/// Joins the link-restricted sub-graphs of two neighbours into a fresh segment.
/// `pfo` absent yields a singly-linked segment. Links of o1/o2 are left untouched.
std::optional<MergeResult> merge_pair(const Smg& g, ObjectId o1, ObjectId o2, Offset hfo, Offset nfo,
                                      std::optional<Offset> pfo);

}  // namespace smg
