#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace nspolar {

// Resistive crossbar read model. Each cell sits between a wordline node and a
// bitline node; every wire segment (one per cell per line) carries
// wire_resistance. Row drivers attach through one segment at the j = 0 edge;
// per-column sense amplifiers (virtual ground) attach through one segment at
// the i = 0 edge, so the top-left cell sees the shortest path and the
// bottom-right the longest, matching the reliability gradient of parallel
// row reads.
struct CrossbarConfig {
    size_t rows = 32;
    size_t cols = 32;
    double wire_resistance = 25.0;  // ohms per segment
    double r_lrs = 1e3;             // low-resistance state, stores 0
    double r_hrs = 1e6;             // high-resistance state, stores 1
    double read_voltage = 1.0;
    double solver_rel_tol = 1e-10;
    enum class Solver : uint8_t { automatic, banded_direct, conjugate_gradient };
    Solver solver = Solver::automatic;
};

struct BitMatrix {
    size_t rows = 0, cols = 0;
    std::vector<uint8_t> bits;  // row-major; 1 = HRS, 0 = LRS

    BitMatrix() = default;
    BitMatrix(size_t r, size_t c) : rows(r), cols(c), bits(r * c, 0) {}
    uint8_t& at(size_t i, size_t j) { return bits[i * cols + j]; }
    uint8_t at(size_t i, size_t j) const { return bits[i * cols + j]; }
};

struct CurrentMap {
    size_t rows = 0, cols = 0;
    std::vector<double> amps;  // row-major, entry (i,j) = column-j current while reading row i

    CurrentMap() = default;
    CurrentMap(size_t r, size_t c) : rows(r), cols(c), amps(r * c, 0.0) {}
    double& at(size_t i, size_t j) { return amps[i * cols + j]; }
    double at(size_t i, size_t j) const { return amps[i * cols + j]; }
};

// Assembles the nodal conductance system for one stored array and solves
// per-row read configurations. The matrix depends only on the stored bits,
// so one factorization serves all rows.
class CrossbarSolver {
  public:
    CrossbarSolver(const CrossbarConfig& cfg, const BitMatrix& bits);
    ~CrossbarSolver();
    CrossbarSolver(const CrossbarSolver&) = delete;
    CrossbarSolver& operator=(const CrossbarSolver&) = delete;

    // Sensed current per column while reading `row`.
    std::vector<double> read_row(size_t row);

    // All rows at once (batched right-hand sides for the direct path).
    CurrentMap read_all();

    // Full node-voltage solution for one read; index via wordline_index /
    // bitline_index.
    std::vector<double> node_voltages(size_t row);
    size_t wordline_index(size_t i, size_t j) const;
    size_t bitline_index(size_t i, size_t j) const;
    size_t unknown_count() const { return n_; }

    // Relative residual of the most recent solve.
    double last_residual() const { return last_residual_; }

    struct Energy {
        double injected;  // current out of the read-voltage source
        double absorbed;  // current into grounded drivers and sense terminals
    };
    Energy energy(size_t row);

  private:
    struct Impl;
    std::vector<double> solve(size_t row);
    void factorize();
    void apply_system(const double* x, double* y) const;
    void check_and_refine(const std::vector<double>& b, std::vector<double>& x);
    std::vector<double> conjugate_gradient(const std::vector<double>& b);

    CrossbarConfig cfg_;
    BitMatrix bits_;
    size_t n_;
    bool row_major_cells_;
    double last_residual_ = 0.0;
    Impl* impl_;
};

// Convenience wrappers.
std::vector<double> read_row(const CrossbarConfig& cfg, const BitMatrix& bits, size_t row);
CurrentMap read_array(const CrossbarConfig& cfg, const BitMatrix& bits);

// CSV export (columns: row, col, amps).
void write_current_csv(const CurrentMap& map, std::ostream& out);

}  // namespace nspolar
