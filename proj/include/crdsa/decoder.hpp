#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "crdsa/core.hpp"
#include "crdsa/random_stream.hpp"

namespace crdsa {

using SlotIndex = std::uint32_t;
using PacketIndex = std::uint32_t;

/// Replica placement of one frame: packet i occupies a set of distinct slots.
class FrameLayout {
public:
    FrameLayout() = default;
    explicit FrameLayout(unsigned n_slots) : n_slots_(n_slots) {}
    FrameLayout(unsigned n_slots, std::initializer_list<std::initializer_list<SlotIndex>> packets);

    unsigned n_slots() const noexcept { return n_slots_; }
    std::size_t packet_count() const noexcept { return offsets_.size() - 1; }
    std::size_t replica_count() const noexcept { return slots_.size(); }

    std::span<const SlotIndex> replicas(PacketIndex packet) const
    {
        return {slots_.data() + offsets_[packet], slots_.data() + offsets_[packet + 1]};
    }

    /// Appends a packet; throws std::invalid_argument if the slot set is
    /// empty, out of range or has repeats.
    void add_packet(std::span<const SlotIndex> slots);

    /// Drops all packets and resizes the frame, keeping allocated storage.
    void reset(unsigned n_slots);

    bool operator==(const FrameLayout&) const = default;

private:
    friend void place_replicas_into(FrameLayout&, std::size_t, const DegreeDistribution&, unsigned, RandomStream&);

    unsigned n_slots_ = 0;
    std::vector<SlotIndex> slots_;
    std::vector<std::size_t> offsets_{0};
};

class PlacementError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Places `n_packets` packets, each with a degree drawn from `dist` and its
/// replicas on distinct slots chosen uniformly without replacement.
FrameLayout place_replicas(std::size_t n_packets, const DegreeDistribution& dist, unsigned n_slots,
                           RandomStream& rng);

/// As place_replicas, reusing the storage of `layout`.
void place_replicas_into(FrameLayout& layout, std::size_t n_packets, const DegreeDistribution& dist,
                         unsigned n_slots, RandomStream& rng);

struct DecodeResult {
    std::vector<PacketIndex> decoded;  // ascending
    std::vector<PacketIndex> lost;     // ascending
    unsigned iterations_used = 0;
};

/// Iterative interference cancellation with perfect cancellation.
///
/// One iteration resolves every slot that currently holds exactly one
/// undecoded replica, then cancels all replicas of the packets it resolved.
/// Iterations stop when a pass resolves nothing or after `i_max` passes,
/// so `i_max == 0` decodes nothing and plain collision-free reception is
/// the first pass. Scratch buffers are kept between calls.
class SicDecoder {
public:
    DecodeResult decode(const FrameLayout& layout, unsigned i_max);

    /// Number of decoded packets only; same peeling as decode().
    std::size_t count_decoded(const FrameLayout& layout, unsigned i_max);

private:
    unsigned peel(const FrameLayout& layout, unsigned i_max);

    std::vector<std::uint32_t> slot_load_;
    std::vector<std::uint64_t> slot_id_sum_;
    std::vector<PacketIndex> resolved_;
    std::vector<std::uint8_t> decoded_;
};

DecodeResult sic_decode(const FrameLayout& layout, unsigned i_max);

struct Rational {
    std::uint64_t numerator = 0;
    std::uint64_t denominator = 1;

    double value() const noexcept { return static_cast<double>(numerator) / static_cast<double>(denominator); }
    bool operator==(const Rational&) const = default;
};

class EnumerationBoundExceeded : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr std::uint64_t kEnumerationBound = 10'000'000;

/// Exact packet loss ratio over all C(n_slots, degree)^n_packets equiprobable
/// placements. Test oracle for small instances.
Rational brute_force_plr(unsigned n_packets, unsigned degree, unsigned n_slots, unsigned i_max);

/// One line per packet with comma-separated slot indices.
std::string format_layout(const FrameLayout& layout);
FrameLayout parse_layout(const std::string& text, unsigned n_slots);

}  // namespace crdsa
