#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ib/common.hpp"
#include "ib/joint.hpp"
#include "ib/pmf.hpp"

namespace ib {

// Finite-cell discretization of a general-alphabet source: cell weights
// approximating mu_x plus per-cell conditional rows for the relevance
// variable y and the bottleneck variable u. The induced joint
// w(cell) * k_y(y|cell) * k_u(u|cell) makes y - x - u Markov by construction.
struct GridSource {
    std::vector<std::string> ids;
    PMF weights;
    Kernel y_channel;
    Kernel u_channel;

    GridSource(std::vector<std::string> cell_ids, PMF cell_weights, Kernel y_chan, Kernel u_chan)
        : ids(std::move(cell_ids)),
          weights(std::move(cell_weights)),
          y_channel(std::move(y_chan)),
          u_channel(std::move(u_chan)) {
        if (ids.size() != weights.size() || y_channel.input_size() != weights.size() ||
            u_channel.input_size() != weights.size())
            throw InvalidDistribution("GridSource: per-cell shapes disagree");
    }

    std::size_t cell_count() const { return weights.size(); }

    // Replace the bottleneck channel (e.g. with an encoder from a pre-solve).
    GridSource with_u_channel(Kernel u_chan) const {
        return GridSource(ids, weights, y_channel, std::move(u_chan));
    }

    // Joint over (y, x) with x the cell axis.
    JointPMF to_joint_yx() const {
        const std::size_t nc = cell_count(), ny = y_channel.output_size();
        std::vector<double> t(ny * nc, 0.0);
        for (std::size_t c = 0; c < nc; ++c)
            for (std::size_t y = 0; y < ny; ++y) t[y * nc + c] = weights[c] * y_channel(c, y);
        return JointPMF({{"y", ny}, {"x", nc}}, std::move(t));
    }

    // Full induced joint over (y, x, u).
    JointPMF to_joint() const {
        const std::size_t nc = cell_count();
        const std::size_t ny = y_channel.output_size(), nu = u_channel.output_size();
        if (nc > kMaxTableCells / (ny * nu))
            throw SizeExceeded("GridSource::to_joint: table exceeds dense guard");
        std::vector<double> t(ny * nc * nu, 0.0);
        for (std::size_t y = 0; y < ny; ++y)
            for (std::size_t c = 0; c < nc; ++c) {
                const double m = weights[c] * y_channel(c, y);
                for (std::size_t u = 0; u < nu; ++u) t[(y * nc + c) * nu + u] = m * u_channel(c, u);
            }
        return JointPMF({{"y", ny}, {"x", nc}, {"u", nu}}, std::move(t));
    }
};

}  // namespace ib
