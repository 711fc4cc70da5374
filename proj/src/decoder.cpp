#include "crdsa/decoder.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace crdsa {

FrameLayout::FrameLayout(unsigned n_slots, std::initializer_list<std::initializer_list<SlotIndex>> packets)
    : n_slots_(n_slots)
{
    for (const auto& packet : packets)
        add_packet(std::span<const SlotIndex>(packet.begin(), packet.size()));
}

void FrameLayout::add_packet(std::span<const SlotIndex> slots)
{
    if (slots.empty())
        throw std::invalid_argument("packet must occupy at least one slot");
    for (std::size_t i = 0; i < slots.size(); ++i) {
        if (slots[i] >= n_slots_)
            throw std::invalid_argument("slot index " + std::to_string(slots[i]) + " outside frame of " +
                                        std::to_string(n_slots_) + " slots");
        for (std::size_t j = 0; j < i; ++j)
            if (slots[j] == slots[i])
                throw std::invalid_argument("packet places two replicas in slot " + std::to_string(slots[i]));
    }
    slots_.insert(slots_.end(), slots.begin(), slots.end());
    offsets_.push_back(slots_.size());
}

void FrameLayout::reset(unsigned n_slots)
{
    n_slots_ = n_slots;
    slots_.clear();
    offsets_.assign(1, 0);
}

void place_replicas_into(FrameLayout& layout, std::size_t n_packets, const DegreeDistribution& dist,
                         unsigned n_slots, RandomStream& rng)
{
    if (dist.max_degree() > n_slots)
        throw PlacementError("degree " + std::to_string(dist.max_degree()) + " exceeds frame size " +
                             std::to_string(n_slots));
    layout.reset(n_slots);
    layout.slots_.reserve(static_cast<std::size_t>(n_packets * dist.max_degree()));
    layout.offsets_.reserve(n_packets + 1);
    for (std::size_t p = 0; p < n_packets; ++p) {
        const unsigned degree = sample_degree(dist, rng);
        const auto first = layout.slots_.size();
        // Floyd's sampling: `degree` draws give a uniform subset of the slots.
        for (unsigned j = n_slots - degree; j < n_slots; ++j) {
            const SlotIndex t = rng.below(j + 1);
            const auto begin = layout.slots_.begin() + static_cast<std::ptrdiff_t>(first);
            const bool taken = std::find(begin, layout.slots_.end(), t) != layout.slots_.end();
            layout.slots_.push_back(taken ? j : t);
        }
        std::sort(layout.slots_.begin() + static_cast<std::ptrdiff_t>(first), layout.slots_.end());
        layout.offsets_.push_back(layout.slots_.size());
    }
}

FrameLayout place_replicas(std::size_t n_packets, const DegreeDistribution& dist, unsigned n_slots,
                           RandomStream& rng)
{
    FrameLayout layout;
    place_replicas_into(layout, n_packets, dist, n_slots, rng);
    return layout;
}

unsigned SicDecoder::peel(const FrameLayout& layout, unsigned i_max)
{
    const auto n_packets = layout.packet_count();
    slot_load_.assign(layout.n_slots(), 0);
    slot_id_sum_.assign(layout.n_slots(), 0);
    decoded_.assign(n_packets, 0);

    for (PacketIndex p = 0; p < n_packets; ++p)
        for (SlotIndex s : layout.replicas(p)) {
            ++slot_load_[s];
            slot_id_sum_[s] += p;
        }

    unsigned iterations = 0;
    while (iterations < i_max) {
        resolved_.clear();
        // A singleton slot's id sum is the index of its only packet.
        for (std::size_t s = 0; s < slot_load_.size(); ++s) {
            if (slot_load_[s] != 1)
                continue;
            const auto p = static_cast<PacketIndex>(slot_id_sum_[s]);
            if (!decoded_[p]) {
                decoded_[p] = 1;
                resolved_.push_back(p);
            }
        }
        if (resolved_.empty())
            break;
        for (PacketIndex p : resolved_)
            for (SlotIndex s : layout.replicas(p)) {
                --slot_load_[s];
                slot_id_sum_[s] -= p;
            }
        ++iterations;
    }
    return iterations;
}

DecodeResult SicDecoder::decode(const FrameLayout& layout, unsigned i_max)
{
    DecodeResult result;
    result.iterations_used = peel(layout, i_max);
    for (PacketIndex p = 0; p < layout.packet_count(); ++p)
        (decoded_[p] ? result.decoded : result.lost).push_back(p);
    return result;
}

std::size_t SicDecoder::count_decoded(const FrameLayout& layout, unsigned i_max)
{
    peel(layout, i_max);
    return static_cast<std::size_t>(std::count(decoded_.begin(), decoded_.end(), std::uint8_t{1}));
}

DecodeResult sic_decode(const FrameLayout& layout, unsigned i_max)
{
    SicDecoder decoder;
    return decoder.decode(layout, i_max);
}

namespace {

std::vector<std::vector<SlotIndex>> all_subsets(unsigned n_slots, unsigned size)
{
    std::vector<std::vector<SlotIndex>> out;
    std::vector<SlotIndex> current(size);
    std::iota(current.begin(), current.end(), SlotIndex{0});
    if (size == 0 || size > n_slots)
        return out;
    while (true) {
        out.push_back(current);
        int i = static_cast<int>(size) - 1;
        while (i >= 0 && current[static_cast<std::size_t>(i)] == n_slots - size + static_cast<unsigned>(i))
            --i;
        if (i < 0)
            break;
        ++current[static_cast<std::size_t>(i)];
        for (auto j = static_cast<std::size_t>(i) + 1; j < size; ++j)
            current[j] = current[j - 1] + 1;
    }
    return out;
}

}  // namespace

Rational brute_force_plr(unsigned n_packets, unsigned degree, unsigned n_slots, unsigned i_max)
{
    if (n_packets < 1 || degree < 1 || n_slots < 1)
        throw std::invalid_argument("brute_force_plr needs positive packet count, degree and frame size");
    if (degree > n_slots)
        throw PlacementError("degree exceeds frame size");
    const auto subsets = all_subsets(n_slots, degree);
    const std::uint64_t choices = subsets.size();

    std::uint64_t placements = 1;
    for (unsigned i = 0; i < n_packets; ++i) {
        if (placements > kEnumerationBound / choices)
            throw EnumerationBoundExceeded("C(" + std::to_string(n_slots) + "," + std::to_string(degree) + ")^" +
                                           std::to_string(n_packets) + " placements exceed the bound");
        placements *= choices;
    }

    SicDecoder decoder;
    FrameLayout layout;
    std::vector<std::size_t> odometer(n_packets, 0);
    std::uint64_t lost = 0;
    for (std::uint64_t k = 0; k < placements; ++k) {
        layout.reset(n_slots);
        for (auto index : odometer)
            layout.add_packet(subsets[index]);
        lost += n_packets - decoder.count_decoded(layout, i_max);
        for (std::size_t digit = 0; digit < n_packets; ++digit) {
            if (++odometer[digit] < choices)
                break;
            odometer[digit] = 0;
        }
    }

    Rational r{lost, placements * n_packets};
    const auto g = std::gcd(r.numerator, r.denominator);
    if (g > 1) {
        r.numerator /= g;
        r.denominator /= g;
    }
    return r;
}

std::string format_layout(const FrameLayout& layout)
{
    std::string out;
    for (PacketIndex p = 0; p < layout.packet_count(); ++p) {
        bool first = true;
        for (SlotIndex s : layout.replicas(p)) {
            if (!first)
                out += ',';
            out += std::to_string(s);
            first = false;
        }
        out += '\n';
    }
    return out;
}

FrameLayout parse_layout(const std::string& text, unsigned n_slots)
{
    FrameLayout layout(n_slots);
    std::istringstream lines(text);
    std::string line;
    std::vector<SlotIndex> slots;
    while (std::getline(lines, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        slots.clear();
        std::istringstream items(line);
        std::string item;
        while (std::getline(items, item, ','))
            slots.push_back(static_cast<SlotIndex>(std::stoul(item)));
        layout.add_packet(slots);
    }
    return layout;
}

}  // namespace crdsa
