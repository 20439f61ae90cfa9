/*
   Copyright 2026 The rivolution Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <vector>

#include "rivo/nn/layers.hpp"

namespace rivo::nn {

// Adam with bias correction. Betas/eps are the common defaults, no weight
// decay; the reference protocol names only the optimizer.
template <typename S>
class Adam {
  public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(std::vector<ParamRef<S>>& params) {
        if (m_.empty()) {
            for (const auto& p : params) {
                m_.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
                v_.push_back(Mat<S>::Zero(p.value->rows(), p.value->cols()));
            }
        }
        ++t_;
        const S c1 = static_cast<S>(1.0 - std::pow(beta1_, t_));
        const S c2 = static_cast<S>(1.0 - std::pow(beta2_, t_));
        for (std::size_t i = 0; i < params.size(); ++i) {
            const Mat<S>& g = *params[i].grad;
            m_[i] = static_cast<S>(beta1_) * m_[i] + static_cast<S>(1.0 - beta1_) * g;
            v_[i].array() = static_cast<S>(beta2_) * v_[i].array() +
                            static_cast<S>(1.0 - beta2_) * g.array().square();
            params[i].value->array() -=
                static_cast<S>(lr_) * (m_[i].array() / c1) /
                ((v_[i].array() / c2).sqrt() + static_cast<S>(eps_));
        }
    }

    double learning_rate() const { return lr_; }

  private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<Mat<S>> m_, v_;
};

}  // namespace rivo::nn
