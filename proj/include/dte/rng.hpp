/*
 * Copyright 2026 The dtedesign Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace dte {

/// SplitMix64 mixer, used to derive independent stream seeds from a master
/// seed plus an arbitrary key path. Streams derived from distinct paths are
/// independent for all practical purposes, which makes simulation results
/// reproducible regardless of how trials are scheduled across threads.
struct SplitMix64 {
    std::uint64_t state;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

/// xoshiro256++ engine. Small, fast, and fully under our control so that
/// draw sequences are identical across platforms and worker counts.
class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(const std::array<std::uint64_t, 4>& s) : s_(s) {
        bool all_zero = true;
        for (auto w : s_) all_zero = all_zero && w == 0;
        if (all_zero) s_[0] = 0x9e3779b97f4a7c15ULL;
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> s_;
};

/// A counter-derived random stream with the handful of samplers the
/// simulation engine needs. Each logical unit of work (one simulated trial,
/// one grid point) owns its stream, keyed by the master seed and the unit's
/// indices, so parallel execution cannot reorder draws.
class RngStream {
  public:
    /// Derive a stream from a master seed and a key path.
    static RngStream from_key(std::uint64_t master,
                              std::initializer_list<std::uint64_t> path) {
        SplitMix64 mix{master};
        for (std::uint64_t w : path) {
            mix.state = mix.next() ^ (w * 0x9e3779b97f4a7c15ULL);
        }
        std::array<std::uint64_t, 4> s{};
        for (auto& word : s) word = mix.next();
        return RngStream(Xoshiro256pp(s));
    }

    std::uint64_t next_u64() { return engine_.next(); }

    /// Uniform on the open interval (0, 1).
    double uniform() {
        // 53-bit mantissa; map 0 to the smallest representable step.
        std::uint64_t bits = engine_.next() >> 11;
        double u = static_cast<double>(bits) * 0x1.0p-53;
        if (u <= 0.0) u = 0x1.0p-53;
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Exponential with the given mean.
    double exponential(double mean) { return -mean * std::log(uniform()); }

    /// Standard normal via Box-Muller (no state carried between calls).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

    /// Gamma with given shape and unit scale (Marsaglia-Tsang). Fractional
    /// shapes are supported; shape == 0 is the degenerate point mass at 0.
    double gamma(double shape) {
        if (shape < 0.0) throw std::invalid_argument("gamma: negative shape");
        if (shape == 0.0) return 0.0;
        if (shape < 1.0) {
            double u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform();
            double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
                return d * v;
            }
        }
    }

    double gamma(double shape, double scale) { return scale * gamma(shape); }

  private:
    explicit RngStream(Xoshiro256pp engine) : engine_(engine) {}
    Xoshiro256pp engine_;
};

}  // namespace dte
