// Copyright 2026 The trilink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TRILINK_SAMPLING_H_
#define TRILINK_SAMPLING_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trilink/core.h"
#include "trilink/detection.h"
#include "trilink/kv_text.h"
#include "trilink/random.h"
#include "trilink/statistics.h"

namespace trilink {

/// Everything between the ideal state and the recorded signal.
///
/// Partial collection thins only the correlated light of an arm; spurious
/// light is an independent single-mode thermal admixture per temporal mode;
/// electronic noise is additive Gaussian on the integrated output, in
/// photon-equivalent units.
struct NoiseModel {
    std::int64_t mu = 1;                       // temporal modes per shot
    std::array<double, 3> sigma_el{0, 0, 0};   // electronic noise std per arm
    std::array<double, 3> spurious{0, 0, 0};   // thermal photons per temporal mode
    std::array<double, 3> collect{1, 1, 1};    // collected fraction of correlated light

    void validate() const;
    bool has_electronic_noise() const;
};

struct ShotRecord {
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;

    double operator[](int arm) const { return arm == 1 ? m1 : (arm == 2 ? m2 : m3); }
    friend bool operator==(const ShotRecord &, const ShotRecord &) = default;
};

/// Generation parameters carried alongside a run.
struct ShotMeta {
    std::optional<CouplingConfig> coupling;
    ModeMeans means;
    DetectionConfig detection;
    NoiseModel noise;
    std::uint64_t seed = 0;
    std::int64_t shots = 0;
    bool dark = false;

    KeyValueText to_text() const;
    static ShotMeta from_text(const KeyValueText &doc);
};

/// Immutable run of detected triplets.
class ShotSet {
   public:
    /// Throws kInvalidArgument when the record count differs from meta.shots.
    ShotSet(ShotMeta meta, std::vector<ShotRecord> records);

    const ShotMeta &meta() const { return meta_; }
    std::span<const ShotRecord> records() const { return records_; }
    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }

   private:
    ShotMeta meta_;
    std::vector<ShotRecord> records_;
};

/// One pulse: mu temporal modes of the state, collection and efficiency
/// losses, spurious thermal light, electronic noise.
ShotRecord sample_shot(const ModeMeans &m, const DetectionConfig &d, const NoiseModel &nm, RandomStream &rng);

/// `threads` == 0 uses the hardware concurrency. The result depends only on
/// the inputs and the seed: shot i always draws from stream (seed, i).
ShotSet sample_run(const ModeMeans &m, const DetectionConfig &d, const NoiseModel &nm, std::int64_t shots,
                   std::uint64_t seed, unsigned threads = 0);
ShotSet sample_run(const CouplingConfig &c, const DetectionConfig &d, const NoiseModel &nm, std::int64_t shots,
                   std::uint64_t seed, unsigned threads = 0);

/// Acquisition without light: records hold electronic noise only.
ShotSet sample_dark_run(const DetectionConfig &d, const NoiseModel &nm, std::int64_t shots, std::uint64_t seed,
                        unsigned threads = 0);

/// Exact per-shot moments of the sampled signal under the full noise model.
MomentSet expected_moments(const ModeMeans &m, const DetectionConfig &d, const NoiseModel &nm);

/// CSV `shot,m1,m2,m3` at `path` plus metadata at `path + ".meta"`.
void write_shot_set(const ShotSet &set, const std::string &path);
ShotSet read_shot_set(const std::string &path);

/// Runs `count` index-keyed tasks on up to `threads` workers in contiguous
/// chunks. `threads` == 0 means hardware concurrency.
template <typename Fn>
void parallel_for(std::int64_t count, unsigned threads, Fn &&fn);

}  // namespace trilink

#include "trilink/parallel_inl.h"

#endif  // TRILINK_SAMPLING_H_
