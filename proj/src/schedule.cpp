#include "l0comb/schedule.hpp"

#include <bit>
#include <numeric>
#include <stdexcept>

namespace l0comb {

std::size_t UpdateMask::count() const {
    return std::accumulate(bits.begin(), bits.end(), std::size_t{0});
}

namespace {

void check_counts(std::size_t length, std::size_t count, const char* who) {
    if (count < 1 || count > length)
        throw std::invalid_argument(std::string(who) + ": need 1 <= M <= L");
}

}  // namespace

std::vector<UpdateMask> even_exclusive_masks(std::size_t length, std::size_t count) {
    check_counts(length, count, "even_exclusive_masks");
    std::vector<UpdateMask> out(count, UpdateMask{std::vector<std::uint8_t>(length, 0)});
    for (std::size_t j = 0; j < length; ++j) out[j % count].bits[j] = 1;
    return out;
}

std::vector<UpdateMask> uneven_masks(std::size_t length, std::size_t count) {
    check_counts(length, count, "uneven_masks");
    std::vector<UpdateMask> out(count, UpdateMask{std::vector<std::uint8_t>(length, 0)});
    for (std::size_t l = 1; l <= count; ++l) {
        const std::size_t stride = std::bit_ceil(l);  // smallest power of two >= l
        for (std::size_t j = l - 1; j < length; j += stride) out[l - 1].bits[j] = 1;
    }
    return out;
}

MaskFamily::MaskFamily(const SchedulePolicy& policy) : policy_(policy) {
    check_counts(policy.length, policy.filters, "MaskFamily");
    switch (policy.kind) {
        case PolicyKind::FullUpdate:
            masks_ = {UpdateMask{std::vector<std::uint8_t>(policy.length, 1)}};
            break;
        case PolicyKind::ExclusiveRotating:
        case PolicyKind::SameSubsetRotating:
            masks_ = even_exclusive_masks(policy.length, policy.filters);
            break;
        case PolicyKind::UnevenRotating:
            masks_ = uneven_masks(policy.length, policy.filters);
            break;
    }
}

const UpdateMask& MaskFamily::mask_for(std::size_t filter_index, std::size_t iteration) const {
    if (filter_index < 1 || filter_index > policy_.filters)
        throw std::invalid_argument("mask_for: filter index out of range");
    switch (policy_.kind) {
        case PolicyKind::FullUpdate:
            return masks_[0];
        case PolicyKind::ExclusiveRotating:
        case PolicyKind::UnevenRotating:
            return masks_[(iteration + filter_index - 1) % policy_.filters];
        case PolicyKind::SameSubsetRotating:
            return masks_[iteration % policy_.filters];
    }
    throw std::logic_error("mask_for: unknown policy kind");
}

double MaskFamily::mean_updates_per_iter() const {
    if (policy_.kind == PolicyKind::FullUpdate) return static_cast<double>(policy_.length);
    std::size_t total = 0;
    for (const auto& m : masks_) total += m.count();
    return static_cast<double>(total) / static_cast<double>(masks_.size());
}

}  // namespace l0comb
