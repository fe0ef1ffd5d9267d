#pragma once

#include <random>
#include <string>
#include <vector>

#include "smg/concretise.hpp"
#include "smg/mil.hpp"
#include "smg/smg.hpp"

namespace smg::testing {

/// Node layouts used by the list builders.
/// Doubly linked: next 0, prev 8, payload 16, size 24. Singly linked: next 0, payload 8, size 16.
inline constexpr Offset kNext = 0;
inline constexpr Offset kPrev = 8;
inline Offset payload_offset(bool doubly) { return doubly ? 16 : 8; }
inline Offset node_size(bool doubly) { return doubly ? 24 : 16; }

ObjectId add_region(Smg& g, Offset size, unsigned level = 0, bool valid = true);
ObjectId add_segment(Smg& g, bool doubly, Offset size, unsigned len, Offset hfo = 0, Offset nfo = kNext,
                     Offset pfo = kPrev);

/// Address of `o` at `off`, reusing an existing one; `tg` is adjusted to the object kind.
ValueId address_of(Smg& g, ObjectId o, Tg tg, Offset off = 0);

void set_ptr(Smg& g, ObjectId o, Offset off, ValueId v);
/// Adds a variable and stores `v` in it.
ObjectId add_var(Spc& c, const std::string& name, ValueId v = kZero);
ValueId var_value(const Spc& c, const std::string& name);

/// Shape of one list node for `build_list`.
struct NodeSpec {
    bool segment = false;
    unsigned len = 0;
    /// 0: payload zero, 1: payload unknown (fresh), 2: payload unknown shared by all nodes marked 2.
    int payload = 0;
};

/// Builds a null-terminated list reachable from variable `var`; returns the node objects.
std::vector<ObjectId> build_list(Spc& c, const std::string& var, bool doubly, const std::vector<NodeSpec>& nodes);

/// Random small list configuration with variables x and y. `y_shape` 0: y null,
/// 1: y aliases x, 2: y owns a separate region; negative picks one at random.
Spc random_list_spc(std::mt19937& rng, bool doubly, int y_shape = -1);

/// Two random configurations of the same list kind whose y variables have the same shape.
std::pair<Spc, Spc> random_list_pair(std::mt19937& rng);

/// Every graph in the bounded concretisation of `specific` is represented by `general`.
bool includes(const Spc& general, const Spc& specific, unsigned k = 3);

/// Outcome of one randomized write checked against the byte-level oracle.
struct WriteCase {
    bool ok = true;
    std::string detail;
};
WriteCase check_random_write(std::mt19937& rng);

std::string corpus_dir();
std::vector<std::string> corpus_names();
std::string read_file(const std::string& path);
mil::Program corpus_program(const std::string& name);
std::string expected_verdict(const std::string& name);

}  // namespace smg::testing
