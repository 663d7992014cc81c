#pragma once

#include <cstdint>

#include "cstab/hash.hpp"
#include "cstab/tensor.hpp"

namespace cstab {

struct ModelConfig {
    int layers = 1;
    int heads = 1;
    int d_model = 8;
    int d_ff = 16;
    int vocab = 8;
    int context = 8;

    int head_dim() const { return d_model / heads; }

    void validate() const {
        if (layers < 0 || heads < 1 || d_model < 1 || d_ff < 1 || vocab < 1 || context < 1) {
            throw Error("model config: all dimensions must be positive (layers may be 0)");
        }
        if (layers > 0 && d_model % heads != 0) {
            throw Error("model config: d_model must be divisible by heads");
        }
    }

    uint64_t hash() const {
        Fnv1a h;
        h.update("model-config-v1");
        h.update_i64(layers);
        h.update_i64(heads);
        h.update_i64(d_model);
        h.update_i64(d_ff);
        h.update_i64(vocab);
        h.update_i64(context);
        return h.digest();
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

}  // namespace cstab
