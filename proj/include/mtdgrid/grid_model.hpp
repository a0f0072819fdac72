#pragma once

#include <Eigen/Dense>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace mtdgrid {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Branch {
    int index = 0;       // 1-based position in file order
    int from_bus = 0;
    int to_bus = 0;
    double susceptance = 0.0;  // per-unit, negative
    double flow_limit = 0.0;   // MW; 0 means unlimited
};

struct Generator {
    int bus = 0;
    double p_max = 0.0;      // MW
    double cost_rate = 0.0;  // $/MWh
};

struct GridCase {
    std::string name;
    int n_buses = 0;                  // bus ids are 1..n_buses
    std::vector<double> load_mw;      // per bus, load_mw[i-1] for bus i
    std::vector<Branch> branches;
    std::vector<Generator> generators;

    int n_states() const { return n_buses - 1; }
    int n_branches() const { return static_cast<int>(branches.size()); }
};

GridCase parse_case(const std::string& text);
GridCase load_case_file(const std::string& path);
std::string serialize_case(const GridCase& c);
void validate_case(const GridCase& c);

// Branch-bus incidence: row t has +1 at the start bus of branch k_t and -1
// at the end bus. Size l x (n+1).
Eigen::MatrixXd incidence_matrix(const GridCase& c);

// D = diag(-b_t), so that flows are f = D A theta. Size l x l.
Eigen::MatrixXd susceptance_diagonal(const GridCase& c);

struct RowLabel {
    enum Kind { Injection, FlowForward, FlowReverse } kind;
    int index;  // bus id for Injection, branch index for flows
};

struct MeasurementModel {
    Eigen::MatrixXd H;                // m x n
    std::vector<RowLabel> row_labels;
    int slack_bus = 1;
    int m = 0;
    int n = 0;
    int l = 0;
};

// Fully measured model: H = [B; S; -S] with the slack column removed,
// m = 2l + n + 1 rows. `rows`, when given, selects a subset of the full
// rows (observability is re-checked).
MeasurementModel measurement_matrix(const GridCase& c, int slack_bus = 1);
MeasurementModel measurement_matrix(const GridCase& c, int slack_bus,
                                    const std::vector<int>& rows);

// Maps between bus ids and 0-based state (column) indices of H.
int state_index_of_bus(int bus, int slack_bus);
int bus_of_state_index(int idx, int slack_bus);

// Buses of graph degree exactly 1.
std::set<int> single_branch_buses(const GridCase& c);

// Union of endpoints of the given branches (1-based branch indices).
std::set<int> covered_buses(const GridCase& c, const std::vector<int>& branch_indices);

}  // namespace mtdgrid
