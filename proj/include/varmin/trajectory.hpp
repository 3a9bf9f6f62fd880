#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "varmin/expr.hpp"

namespace varmin {

// Piecewise-smooth vector function on [t0, t1]: continuous, with one-sided
// derivatives everywhere and finite derivative jumps at interior corner
// points. Pieces are closed forms (Expr in the single variable t) or, for
// solver output, a quintic Hermite interpolant. Immutable after
// construction; evaluation is pure.

enum Side : int { kLeft = -1, kAuto = 0, kRight = +1 };

struct ExprPiece {
    double a = 0.0, b = 0.0;
    std::vector<Expr> comps; // dimension entries, each Expr over t only (n=0)
};

struct SplinePiece {
    double a = 0.0, b = 0.0;
    // Uniform nodes; per-node value, derivative and second derivative per
    // coordinate (rows = nodes, cols = coordinates).
    std::vector<double> ts;
    Eigen::MatrixXd x, v, acc;
};

class Trajectory {
public:
    Trajectory() = default;

    // Pieces must tile [t0, t1] exactly and agree in value at shared
    // breakpoints to 1e-10; throws NumericError("BAD_TRAJECTORY") otherwise.
    static Trajectory from_pieces(int n, double t0, double t1,
                                  std::vector<ExprPiece> pieces);
    static Trajectory single(int n, double t0, double t1,
                             std::vector<Expr> comps);
    static Trajectory from_spline(int n, SplinePiece spline);

    int dimension() const { return n_; }
    double t0() const { return t0_; }
    double t1() const { return t1_; }

    // Value and one-sided derivative. side = kAuto resolves to the right
    // except at t1. Throws for t outside [t0, t1].
    void eval(double t, int side, Eigen::VectorXd& x, Eigen::VectorXd& dx) const;
    std::pair<Eigen::VectorXd, Eigen::VectorXd> eval(double t,
                                                     int side = kAuto) const;

    // Interior piece boundaries (all of them, corner or not).
    const std::vector<double>& breakpoints() const { return breakpoints_; }
    // Breakpoints where the one-sided derivatives differ by more than 1e-8.
    const std::vector<double>& corner_set() const { return corners_; }

    std::size_t piece_count() const { return pieces_.size(); }
    std::pair<double, double> piece_bounds(std::size_t i) const;

private:
    using Piece = std::variant<ExprPiece, SplinePiece>;

    void validate_and_finish();
    std::size_t piece_index(double t, int side) const;
    void eval_piece(const Piece& p, double t, Eigen::VectorXd& x,
                    Eigen::VectorXd& dx) const;

    int n_ = 0;
    double t0_ = 0.0, t1_ = 0.0;
    std::vector<Piece> pieces_;
    std::vector<double> breakpoints_;
    std::vector<double> corners_;
};

// Perturbation vanishing at both endpoints by construction: a finite sine
// series per coordinate, sup-normalized to 1 before scaling.
class Perturbation {
public:
    Perturbation() = default;
    Perturbation(Trajectory base, double scale)
        : base_(std::move(base)), scale_(scale) {}

    const Trajectory& base() const { return base_; }
    double scale() const { return scale_; }
    Perturbation scaled(double s) const { return Perturbation(base_, scale_ * s); }

    // Applies the scale; endpoint values are pinned to exactly zero (the
    // series vanishes there analytically, fp sine residue is dropped).
    void eval(double t, Eigen::VectorXd& dx_val, Eigen::VectorXd& ddx_val) const;
    std::pair<Eigen::VectorXd, Eigen::VectorXd> eval(double t) const;

private:
    Trajectory base_;
    double scale_ = 1.0;
};

// Deterministic in (n, interval, seed, k): coefficients from a seeded
// generator, k sine modes per coordinate, sup-normalized so max |dx| = 1.
Perturbation make_bump_perturbation(int n, double t0, double t1,
                                    std::uint64_t seed, int k);

} // namespace varmin
