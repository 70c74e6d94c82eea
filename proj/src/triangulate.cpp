// Ear-clipping triangulation with hole bridging. The bridge search and ear
// test follow the well-known earcut scheme. Collinear ring vertices are kept
// (cut-away caps must share every rim vertex) but never clipped as ears, so
// they end up on the edge of a non-degenerate neighbouring triangle.

#include <algorithm>
#include <cmath>
#include <limits>

#include "slicetrain/geometry.hpp"

namespace slicetrain {

namespace {

constexpr double kCollinear = 1e-9;

struct Node {
    std::uint32_t id;
    double x;
    double y;
    int prev = -1;
    int next = -1;
};

class Triangulator {
public:
    std::vector<std::array<std::uint32_t, 3>> run(const std::vector<Vec2>& outer,
                                                  const std::vector<std::vector<Vec2>>& holes) {
        std::uint32_t base = 0;
        int outer_node = ring(outer, base, true);
        base += static_cast<std::uint32_t>(outer.size());
        if (outer_node < 0) return {};

        std::vector<int> lefts;
        for (const auto& h : holes) {
            const int start = ring(h, base, false);
            base += static_cast<std::uint32_t>(h.size());
            if (start >= 0) lefts.push_back(leftmost(start));
        }
        std::sort(lefts.begin(), lefts.end(), [&](int a, int b) {
            if (nodes_[a].x != nodes_[b].x) return nodes_[a].x < nodes_[b].x;
            return nodes_[a].y < nodes_[b].y;
        });
        for (int h : lefts) eliminate_hole(h, outer_node);

        clip(outer_node);
        return std::move(out_);
    }

private:
    std::vector<Node> nodes_;
    std::vector<std::array<std::uint32_t, 3>> out_;

    // earcut's sign convention: negative for a convex (counter-clockwise) turn.
    static double area(const Node& p, const Node& q, const Node& r) {
        return (q.y - p.y) * (r.x - q.x) - (q.x - p.x) * (r.y - q.y);
    }
    double area(int p, int q, int r) const { return area(nodes_[p], nodes_[q], nodes_[r]); }

    static bool point_in_triangle(double ax, double ay, double bx, double by, double cx, double cy,
                                  double px, double py) {
        return (cx - px) * (ay - py) >= (ax - px) * (cy - py) &&
               (ax - px) * (by - py) >= (bx - px) * (ay - py) &&
               (bx - px) * (cy - py) >= (cx - px) * (by - py);
    }

    // Turn at q relative to the edge lengths: ~ -sin(angle) for a convex turn.
    double relative_turn(int p, int q, int r) const {
        const Node &P = nodes_[p], &Q = nodes_[q], &R = nodes_[r];
        const double scale = std::hypot(Q.x - P.x, Q.y - P.y) * std::hypot(R.x - Q.x, R.y - Q.y);
        return area(p, q, r) / std::max(scale, std::numeric_limits<double>::min());
    }

    bool same_pos(int a, int b) const {
        return nodes_[a].x == nodes_[b].x && nodes_[a].y == nodes_[b].y;
    }

    int ring(const std::vector<Vec2>& pts, std::uint32_t base, bool ccw) {
        if (pts.size() < 3) return -1;
        double twice = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Vec2& a = pts[i];
            const Vec2& b = pts[(i + 1) % pts.size()];
            twice += a.x * b.y - b.x * a.y;
        }
        const bool forward = (twice > 0.0) == ccw;
        const int first = static_cast<int>(nodes_.size());
        const std::size_t n = pts.size();
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t i = forward ? k : n - 1 - k;
            nodes_.push_back(Node{base + static_cast<std::uint32_t>(i), pts[i].x, pts[i].y});
        }
        for (std::size_t k = 0; k < n; ++k) {
            const int cur = first + static_cast<int>(k);
            nodes_[cur].next = first + static_cast<int>((k + 1) % n);
            nodes_[cur].prev = first + static_cast<int>((k + n - 1) % n);
        }
        return first;
    }

    int leftmost(int start) const {
        int p = start, best = start;
        do {
            if (nodes_[p].x < nodes_[best].x || (nodes_[p].x == nodes_[best].x && nodes_[p].y < nodes_[best].y))
                best = p;
            p = nodes_[p].next;
        } while (p != start);
        return best;
    }

    bool locally_inside(int a, int b) const {
        const Node& A = nodes_[a];
        return area(A.prev, a, A.next) < 0 ? area(a, b, A.next) >= 0 && area(a, A.prev, b) >= 0
                                           : area(a, b, A.prev) < 0 || area(a, A.next, b) < 0;
    }

    bool sector_contains_sector(int m, int p) const {
        return area(nodes_[m].prev, m, nodes_[p].prev) < 0 && area(nodes_[p].next, m, nodes_[m].next) < 0;
    }

    int find_hole_bridge(int hole, int outer) const {
        const double hx = nodes_[hole].x, hy = nodes_[hole].y;
        double qx = -std::numeric_limits<double>::infinity();
        int m = -1;
        int p = outer;
        do {
            const Node& P = nodes_[p];
            const Node& N = nodes_[P.next];
            if (hy <= P.y && hy >= N.y && N.y != P.y) {
                const double x = P.x + (hy - P.y) * (N.x - P.x) / (N.y - P.y);
                if (x <= hx && x > qx) {
                    qx = x;
                    if (x == hx) {
                        if (hy == P.y) return p;
                        if (hy == N.y) return P.next;
                    }
                    m = P.x < N.x ? p : P.next;
                }
            }
            p = P.next;
        } while (p != outer);
        if (m < 0) return -1;
        if (hx == qx) return m;

        const int stop = m;
        const double mx = nodes_[m].x, my = nodes_[m].y;
        double tan_min = std::numeric_limits<double>::infinity();
        p = m;
        do {
            const Node& P = nodes_[p];
            if (hx >= P.x && P.x >= mx && hx != P.x &&
                point_in_triangle(hy < my ? hx : qx, hy, mx, my, hy < my ? qx : hx, hy, P.x, P.y)) {
                const double tan = std::abs(hy - P.y) / (hx - P.x);
                if (locally_inside(p, hole) &&
                    (tan < tan_min ||
                     (tan == tan_min && (P.x > nodes_[m].x || (P.x == nodes_[m].x && sector_contains_sector(m, p)))))) {
                    m = p;
                    tan_min = tan;
                }
            }
            p = P.next;
        } while (p != stop);
        return m;
    }

    // Links a to b with a doubled bridge edge; returns the copy of b.
    int split_polygon(int a, int b) {
        const int a2 = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{nodes_[a].id, nodes_[a].x, nodes_[a].y});
        const int b2 = static_cast<int>(nodes_.size());
        nodes_.push_back(Node{nodes_[b].id, nodes_[b].x, nodes_[b].y});
        const int an = nodes_[a].next;
        const int bp = nodes_[b].prev;

        nodes_[a].next = b;
        nodes_[b].prev = a;
        nodes_[a2].next = an;
        nodes_[an].prev = a2;
        nodes_[b2].next = a2;
        nodes_[a2].prev = b2;
        nodes_[bp].next = b2;
        nodes_[b2].prev = bp;
        return b2;
    }

    void eliminate_hole(int hole, int outer) {
        const int bridge = find_hole_bridge(hole, outer);
        if (bridge < 0) return;
        split_polygon(bridge, hole);
    }

    bool is_ear(int ear) const {
        const int a = nodes_[ear].prev, b = ear, c = nodes_[ear].next;
        if (relative_turn(a, b, c) >= -kCollinear) return false;
        const Node &A = nodes_[a], &B = nodes_[b], &C = nodes_[c];
        const double x0 = std::min({A.x, B.x, C.x}), x1 = std::max({A.x, B.x, C.x});
        const double y0 = std::min({A.y, B.y, C.y}), y1 = std::max({A.y, B.y, C.y});
        for (int p = C.next; p != a; p = nodes_[p].next) {
            const Node& P = nodes_[p];
            if (P.x < x0 || P.x > x1 || P.y < y0 || P.y > y1) continue;
            if (same_pos(p, a) || same_pos(p, b) || same_pos(p, c)) continue;
            if (point_in_triangle(A.x, A.y, B.x, B.y, C.x, C.y, P.x, P.y) && area(P.prev, p, P.next) >= 0)
                return false;
        }
        return true;
    }

    void emit_and_remove(int ear) {
        Node& e = nodes_[ear];
        out_.push_back({nodes_[e.prev].id, e.id, nodes_[e.next].id});
        nodes_[e.prev].next = e.next;
        nodes_[e.next].prev = e.prev;
    }

    // When no proper ear exists (numerically awkward input): the most convex
    // vertex.
    int fallback_ear(int start) const {
        int best = start;
        double best_turn = std::numeric_limits<double>::infinity();
        int p = start;
        do {
            const double turn = relative_turn(nodes_[p].prev, p, nodes_[p].next);
            if (turn < best_turn) {
                best_turn = turn;
                best = p;
            }
            p = nodes_[p].next;
        } while (p != start);
        return best;
    }

    void clip(int ear) {
        int stop = ear;
        while (nodes_[ear].prev != nodes_[ear].next) {
            const int next = nodes_[ear].next;
            if (is_ear(ear)) {
                emit_and_remove(ear);
                ear = nodes_[next].next;
                stop = ear;
                continue;
            }
            ear = next;
            if (ear == stop) {
                const int forced = fallback_ear(ear);
                const int after = nodes_[forced].next;
                emit_and_remove(forced);
                ear = after;
                stop = ear;
            }
        }
    }
};

}  // namespace

std::vector<std::array<std::uint32_t, 3>> triangulate_polygon(const std::vector<Vec2>& outer,
                                                              const std::vector<std::vector<Vec2>>& holes) {
    return Triangulator{}.run(outer, holes);
}

}  // namespace slicetrain
