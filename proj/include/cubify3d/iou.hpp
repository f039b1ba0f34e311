// Copyright 2026 The cubify3d Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>

#include "cubify3d/dual.hpp"
#include "cubify3d/geometry.hpp"

namespace cubify3d {

enum class IouKind { k3D, kBev };

namespace detail {

template <typename T>
struct V2 {
  T x{}, z{};
};

template <typename T>
inline T cross(const V2<T>& o, const V2<T>& a, const V2<T>& b) {
  return (a.x - o.x) * (b.z - o.z) - (b.x - o.x) * (a.z - o.z);
}

// Clipping a convex quad by a convex quad yields at most 8 vertices.
template <typename T>
struct ClipPoly {
  std::array<V2<T>, 16> pts{};
  int n = 0;

  void push(const V2<T>& p) { pts[n++] = p; }
};

template <typename T>
inline std::array<V2<T>, 4> oriented_rect(T cx, T cz, T width, T length, T yaw) {
  const T c = cos(yaw);
  const T s = sin(yaw);
  std::array<V2<T>, 4> out;
  for (int k = 0; k < 4; ++k) {
    const T lx = T(kFootprintSigns[k][0] * 0.5) * width;
    const T lz = T(kFootprintSigns[k][1] * 0.5) * length;
    out[k] = V2<T>{cx + lx * c + lz * s, cz - lx * s + lz * c};
  }
  return out;
}

// Sutherland-Hodgman: clip a CCW subject polygon against one CCW quad.
// Points exactly on a clip edge are kept, so touching boxes reduce to a
// zero-area degenerate polygon rather than a missing one.
template <typename T>
inline ClipPoly<T> clip_convex(const ClipPoly<T>& subject, const std::array<V2<T>, 4>& clip) {
  ClipPoly<T> in = subject;
  ClipPoly<T> out;
  for (int e = 0; e < 4 && in.n > 0; ++e) {
    const V2<T>& a = clip[e];
    const V2<T>& b = clip[(e + 1) % 4];
    out.n = 0;
    for (int i = 0; i < in.n; ++i) {
      const V2<T>& cur = in.pts[i];
      const V2<T>& nxt = in.pts[(i + 1) % in.n];
      const T side_cur = cross(a, b, cur);
      const T side_nxt = cross(a, b, nxt);
      const bool cur_in = side_cur >= T(0);
      const bool nxt_in = side_nxt >= T(0);
      if (cur_in) out.push(cur);
      if (cur_in != nxt_in) {
        const T denom = side_cur - side_nxt;
        if (denom != T(0)) {
          const T t = side_cur / denom;
          out.push(V2<T>{cur.x + t * (nxt.x - cur.x), cur.z + t * (nxt.z - cur.z)});
        }
      }
    }
    in = out;
  }
  return in;
}

template <typename T>
inline T shoelace_area(const ClipPoly<T>& poly) {
  if (poly.n < 3) return T(0);
  T twice(0.0);
  for (int i = 0; i < poly.n; ++i) {
    const V2<T>& a = poly.pts[i];
    const V2<T>& b = poly.pts[(i + 1) % poly.n];
    twice += a.x * b.z - b.x * a.z;
  }
  return max(T(0), T(0.5) * twice);
}

template <typename T>
inline T quad_area(const std::array<V2<T>, 4>& q) {
  T twice(0.0);
  for (int i = 0; i < 4; ++i) {
    const V2<T>& a = q[i];
    const V2<T>& b = q[(i + 1) % 4];
    twice += a.x * b.z - b.x * a.z;
  }
  return T(0.5) * twice;
}

template <typename T>
inline T rect_intersection_area(const std::array<V2<T>, 4>& qa, const std::array<V2<T>, 4>& qb) {
  ClipPoly<T> subject;
  for (const auto& p : qa) subject.push(p);
  return shoelace_area(clip_convex(subject, qb));
}

// Geometric box parameters, generic over the scalar type so gradients flow
// through the same clipping code as plain evaluation.
template <typename T>
struct BoxParams {
  T x{}, y{}, z{};
  T width{}, height{}, length{};
  T yaw{};
};

template <typename T>
inline T bev_iou_impl(const BoxParams<T>& a, const BoxParams<T>& b) {
  const auto qa = oriented_rect(a.x, a.z, a.width, a.length, a.yaw);
  const auto qb = oriented_rect(b.x, b.z, b.width, b.length, b.yaw);
  const T inter = rect_intersection_area(qa, qb);
  const T uni = quad_area(qa) + quad_area(qb) - inter;
  if (!(inter > T(0)) || !(uni > T(0))) return T(0);
  return inter / uni;
}

// Exact for boxes whose only rotation is about the vertical axis: the solid
// intersection is a prism, footprint intersection times vertical overlap.
template <typename T>
inline T iou3d_impl(const BoxParams<T>& a, const BoxParams<T>& b) {
  const T lo_a = a.y - T(0.5) * a.height;
  const T hi_a = a.y + T(0.5) * a.height;
  const T lo_b = b.y - T(0.5) * b.height;
  const T hi_b = b.y + T(0.5) * b.height;
  const T overlap = min(hi_a, hi_b) - max(lo_a, lo_b);
  if (!(overlap > T(0))) return T(0);

  const auto qa = oriented_rect(a.x, a.z, a.width, a.length, a.yaw);
  const auto qb = oriented_rect(b.x, b.z, b.width, b.length, b.yaw);
  const T inter_area = rect_intersection_area(qa, qb);
  if (!(inter_area > T(0))) return T(0);

  const T inter = inter_area * overlap;
  const T vol_a = quad_area(qa) * (hi_a - lo_a);
  const T vol_b = quad_area(qb) * (hi_b - lo_b);
  return inter / (vol_a + vol_b - inter);
}

template <typename T>
inline BoxParams<T> to_params(const Box3D& b) {
  return BoxParams<T>{T(b.x_c), T(b.y_c), T(b.z_c), T(b.width), T(b.height), T(b.length),
                      T(b.yaw)};
}

// Canonical argument order makes the public IoU bit-exact under swapping.
inline bool param_order(const Box3D& a, const Box3D& b) {
  const auto key = [](const Box3D& x) {
    return std::array<double, 7>{x.x_c, x.y_c, x.z_c, x.width, x.height, x.length, x.yaw};
  };
  return key(a) <= key(b);
}

}  // namespace detail

/// Footprint intersection-over-union in the ground plane.
inline double bev_iou(const Box3D& a, const Box3D& b) {
  const Box3D& p = detail::param_order(a, b) ? a : b;
  const Box3D& q = detail::param_order(a, b) ? b : a;
  return detail::bev_iou_impl(detail::to_params<double>(p), detail::to_params<double>(q));
}

/// Exact rotated 3D IoU (rotation about the vertical axis only).
inline double iou_3d(const Box3D& a, const Box3D& b) {
  const Box3D& p = detail::param_order(a, b) ? a : b;
  const Box3D& q = detail::param_order(a, b) ? b : a;
  return detail::iou3d_impl(detail::to_params<double>(p), detail::to_params<double>(q));
}

inline double iou(const Box3D& a, const Box3D& b, IouKind kind) {
  return kind == IouKind::k3D ? iou_3d(a, b) : bev_iou(a, b);
}

/// 3D IoU with exact partials w.r.t. the first box's (x, y, z, w, h, l, yaw).
/// Valid at points where the clip topology is locally stable; boundary cases
/// (tangent boxes, vanishing overlap) are the caller's to exclude.
struct IouWithGrad {
  double value = 0.0;
  std::array<double, 7> d_first{};
};

inline IouWithGrad iou3d_with_grad(const Box3D& a, const Box3D& b) {
  using D = Dual<7>;
  detail::BoxParams<D> pa;
  pa.x = D::seeded(a.x_c, 0);
  pa.y = D::seeded(a.y_c, 1);
  pa.z = D::seeded(a.z_c, 2);
  pa.width = D::seeded(a.width, 3);
  pa.height = D::seeded(a.height, 4);
  pa.length = D::seeded(a.length, 5);
  pa.yaw = D::seeded(a.yaw, 6);
  const D r = detail::iou3d_impl(pa, detail::to_params<D>(b));
  return IouWithGrad{r.v, r.d};
}

}  // namespace cubify3d
