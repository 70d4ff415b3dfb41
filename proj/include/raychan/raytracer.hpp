// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "raychan/channel.hpp"
#include "raychan/scene.hpp"

namespace raychan {

/// Specular multipath enumeration via the image method: the LOS path plus
/// every unoccluded reflection sequence of up to max_order faces. Geometry
/// only; amplitude/phase are left unset. Sorted by ascending delay.
std::vector<PropagationPath> trace_paths(const Scene& scene, const Vec3& tx, const Vec3& rx,
                                         int max_order);

/// Perpendicular-polarization Fresnel reflection coefficient at a material
/// interface, eta = eps_r - j*sigma/(2*pi*f*eps0).
std::complex<double> fresnel_coefficient(double cos_incidence, const Material& material,
                                         double frequency);

/// Fills amplitude (free-space spreading times |r| per bounce) and phase
/// (carrier term minus reflection phases, mod 2pi) for a traced path.
PropagationPath finalize_path(PropagationPath path, const Scene& scene, const Vec3& tx,
                              double frequency);

Cir compute_cir(const Scene& scene, const Vec3& tx, const Vec3& rx, const RadioParams& params);

/// H[k] = sum_n a_n e^{-j phi_n} e^{-j 2 pi df_k t_n} with baseband subcarrier
/// offsets df_k = (k - N/2) * bandwidth / N.
Cfr compute_cfr(const Cir& cir, const RadioParams& params);

/// -20 log10(rms |H|); all-zero CFR gives the 400 dB blocked sentinel.
double path_loss_db(const Cfr& cfr);

/// Minimum component delay; empty CIR falls back to line-of-sight time
/// straight_line_distance / c.
double propagation_delay(const Cir& cir, double straight_line_distance);

/// Free-space path loss 20 log10(4 pi d f / c).
double friis_path_loss_db(double distance, double frequency);

/// Full point-to-point channel computation.
ChannelRecord compute_p2p(const Scene& scene, const Vec3& tx, const Vec3& rx,
                          const RadioParams& params);

/// Point-to-multipoint batch: one record per receiver, identical to the
/// record an individual compute_p2p of that pair produces, evaluated
/// data-parallel over the worker pool and gathered in input order.
std::vector<ChannelRecord> compute_p2mp(const Scene& scene, const Vec3& tx,
                                        const std::vector<Vec3>& receivers,
                                        const RadioParams& params);

}  // namespace raychan
