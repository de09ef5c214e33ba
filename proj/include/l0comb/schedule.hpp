#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace l0comb {

/// Indicator vector over tap indices: 1 = this tap is updated.
struct UpdateMask {
    std::vector<std::uint8_t> bits;

    std::size_t size() const { return bits.size(); }
    std::size_t count() const;
    bool operator==(const UpdateMask&) const = default;
};

enum class PolicyKind {
    FullUpdate,
    ExclusiveRotating,
    SameSubsetRotating,
    UnevenRotating,
};

struct SchedulePolicy {
    PolicyKind kind = PolicyKind::FullUpdate;
    std::size_t filters = 1;  // M
    std::size_t length = 1;   // L

    bool operator==(const SchedulePolicy&) const = default;
};

/// Even mutually exclusive subsets: mask i (1-based) selects taps
/// {i, i+M, i+2M, ...}. The M masks partition [1, L].
std::vector<UpdateMask> even_exclusive_masks(std::size_t length, std::size_t count);

/// Uneven subsets: mask l selects {l, l+dl, l+2dl, ...} with dl the smallest
/// power of two >= l. S_1 is the full index set, so masks may overlap;
/// cardinalities are non-increasing in l.
std::vector<UpdateMask> uneven_masks(std::size_t length, std::size_t count);

/// Mask family for one policy, precomputed once; mask_for only rotates
/// which precomputed mask a filter receives.
class MaskFamily {
public:
    explicit MaskFamily(const SchedulePolicy& policy);

    /// Mask for filter k (1-based, in [1, M]) at iteration n. Rotating
    /// policies use subset index l = ((n + k - 1) mod M) + 1; the
    /// same-subset policy uses l = (n mod M) + 1 for every filter.
    const UpdateMask& mask_for(std::size_t filter_index, std::size_t iteration) const;

    const SchedulePolicy& policy() const { return policy_; }
    const std::vector<UpdateMask>& masks() const { return masks_; }

    /// Average number of masked-in tap updates per iteration for one filter
    /// (same for every filter under all four policies).
    double mean_updates_per_iter() const;

private:
    SchedulePolicy policy_;
    std::vector<UpdateMask> masks_;
};

}  // namespace l0comb
