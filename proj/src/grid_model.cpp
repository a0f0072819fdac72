#include "mtdgrid/grid_model.hpp"

#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>

namespace mtdgrid {

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void parse_fail(int lineno, const std::string& what) {
    throw ParseError("line " + std::to_string(lineno) + ": " + what);
}

double to_double(const std::string& s, int lineno) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) parse_fail(lineno, "bad number '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        parse_fail(lineno, "bad number '" + s + "'");
    }
}

int to_int(const std::string& s, int lineno) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) parse_fail(lineno, "bad integer '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        parse_fail(lineno, "bad integer '" + s + "'");
    }
}

}  // namespace

GridCase parse_case(const std::string& text) {
    GridCase c;
    enum Section { None, Bus, BranchSec, Gen } section = None;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<int> bus_ids;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (toks.size() == 1 && (toks[0] == "BUS" || toks[0] == "BRANCH" || toks[0] == "GEN")) {
            section = toks[0] == "BUS" ? Bus : toks[0] == "BRANCH" ? BranchSec : Gen;
            continue;
        }
        switch (section) {
            case None:
                parse_fail(lineno, "data before section header");
            case Bus: {
                if (toks.size() != 2) parse_fail(lineno, "bus row needs: id load_MW");
                bus_ids.push_back(to_int(toks[0], lineno));
                c.load_mw.push_back(to_double(toks[1], lineno));
                break;
            }
            case BranchSec: {
                if (toks.size() != 4 && toks.size() != 5)
                    parse_fail(lineno, "branch row needs: from to kind value [fmax_MW]");
                Branch b;
                b.index = static_cast<int>(c.branches.size()) + 1;
                b.from_bus = to_int(toks[0], lineno);
                b.to_bus = to_int(toks[1], lineno);
                double v = to_double(toks[3], lineno);
                if (toks[2] == "x") {
                    if (v == 0.0) parse_fail(lineno, "zero reactance");
                    b.susceptance = -1.0 / v;
                } else if (toks[2] == "b") {
                    b.susceptance = v;
                } else {
                    parse_fail(lineno, "branch kind must be 'x' or 'b'");
                }
                if (toks.size() == 5) b.flow_limit = to_double(toks[4], lineno);
                c.branches.push_back(b);
                break;
            }
            case Gen: {
                if (toks.size() != 3) parse_fail(lineno, "gen row needs: bus pmax_MW cost_rate");
                Generator g;
                g.bus = to_int(toks[0], lineno);
                g.p_max = to_double(toks[1], lineno);
                g.cost_rate = to_double(toks[2], lineno);
                c.generators.push_back(g);
                break;
            }
        }
    }
    c.n_buses = static_cast<int>(bus_ids.size());
    for (int i = 0; i < c.n_buses; ++i)
        if (bus_ids[i] != i + 1)
            throw ValidationError("bus ids must be contiguous 1..N in order; saw " +
                                  std::to_string(bus_ids[i]) + " at position " +
                                  std::to_string(i + 1));
    validate_case(c);
    return c;
}

GridCase load_case_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open case file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    GridCase c = parse_case(buf.str());
    auto slash = path.find_last_of('/');
    c.name = slash == std::string::npos ? path : path.substr(slash + 1);
    if (c.name.size() > 5 && c.name.substr(c.name.size() - 5) == ".case")
        c.name.resize(c.name.size() - 5);
    return c;
}

std::string serialize_case(const GridCase& c) {
    std::ostringstream out;
    out.precision(17);  // max_digits10: round-trips doubles exactly
    out << "BUS\n";
    for (int i = 0; i < c.n_buses; ++i) out << (i + 1) << " " << c.load_mw[i] << "\n";
    out << "BRANCH\n";
    for (const auto& b : c.branches)
        out << b.from_bus << " " << b.to_bus << " b " << b.susceptance << " "
            << b.flow_limit << "\n";
    out << "GEN\n";
    for (const auto& g : c.generators)
        out << g.bus << " " << g.p_max << " " << g.cost_rate << "\n";
    return out.str();
}

void validate_case(const GridCase& c) {
    if (c.n_buses < 2) throw ValidationError("need at least 2 buses");
    if (static_cast<int>(c.load_mw.size()) != c.n_buses)
        throw ValidationError("load vector size mismatch");
    for (const auto& b : c.branches) {
        if (b.from_bus < 1 || b.from_bus > c.n_buses || b.to_bus < 1 || b.to_bus > c.n_buses)
            throw ValidationError("branch " + std::to_string(b.index) + ": endpoint out of range");
        if (b.from_bus == b.to_bus)
            throw ValidationError("branch " + std::to_string(b.index) + ": self-loop");
        // negative reactance (positive susceptance) occurs in real data for
        // three-winding transformer equivalents; only b == 0 is degenerate
        if (b.susceptance == 0.0 || !std::isfinite(b.susceptance))
            throw ValidationError("branch " + std::to_string(b.index) +
                                  ": susceptance must be nonzero and finite");
    }
    for (const auto& g : c.generators)
        if (g.bus < 1 || g.bus > c.n_buses)
            throw ValidationError("generator bus out of range");
    // connectivity (BFS over the branch graph)
    std::vector<std::vector<int>> adj(c.n_buses + 1);
    for (const auto& b : c.branches) {
        adj[b.from_bus].push_back(b.to_bus);
        adj[b.to_bus].push_back(b.from_bus);
    }
    std::vector<char> seen(c.n_buses + 1, 0);
    std::queue<int> q;
    q.push(1);
    seen[1] = 1;
    int count = 1;
    while (!q.empty()) {
        int u = q.front();
        q.pop();
        for (int v : adj[u])
            if (!seen[v]) {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
    }
    if (count != c.n_buses) throw ValidationError("branch graph is not connected");
}

Eigen::MatrixXd incidence_matrix(const GridCase& c) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(c.n_branches(), c.n_buses);
    for (int t = 0; t < c.n_branches(); ++t) {
        A(t, c.branches[t].from_bus - 1) = 1.0;
        A(t, c.branches[t].to_bus - 1) = -1.0;
    }
    return A;
}

Eigen::MatrixXd susceptance_diagonal(const GridCase& c) {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(c.n_branches(), c.n_branches());
    for (int t = 0; t < c.n_branches(); ++t) D(t, t) = -c.branches[t].susceptance;
    return D;
}

int state_index_of_bus(int bus, int slack_bus) {
    if (bus == slack_bus) return -1;
    return bus < slack_bus ? bus - 1 : bus - 2;
}

int bus_of_state_index(int idx, int slack_bus) {
    int bus = idx + 1;
    return bus < slack_bus ? bus : bus + 1;
}

MeasurementModel measurement_matrix(const GridCase& c, int slack_bus) {
    if (slack_bus < 1 || slack_bus > c.n_buses)
        throw ValidationError("slack bus out of range");
    const int l = c.n_branches();
    const int nb = c.n_buses;
    Eigen::MatrixXd A = incidence_matrix(c);
    Eigen::MatrixXd D = susceptance_diagonal(c);
    Eigen::MatrixXd B = A.transpose() * D * A;  // (n+1) x (n+1)
    Eigen::MatrixXd S = D * A;                  // l x (n+1)

    MeasurementModel mm;
    mm.slack_bus = slack_bus;
    mm.n = nb - 1;
    mm.l = l;
    mm.m = 2 * l + nb;
    Eigen::MatrixXd full(mm.m, nb);
    full.topRows(nb) = B;
    full.middleRows(nb, l) = S;
    full.bottomRows(l) = -S;
    // delete the slack column
    mm.H.resize(mm.m, mm.n);
    int col = 0;
    for (int j = 0; j < nb; ++j)
        if (j != slack_bus - 1) mm.H.col(col++) = full.col(j);
    mm.row_labels.reserve(mm.m);
    for (int i = 1; i <= nb; ++i) mm.row_labels.push_back({RowLabel::Injection, i});
    for (int t = 1; t <= l; ++t) mm.row_labels.push_back({RowLabel::FlowForward, t});
    for (int t = 1; t <= l; ++t) mm.row_labels.push_back({RowLabel::FlowReverse, t});
    return mm;
}

MeasurementModel measurement_matrix(const GridCase& c, int slack_bus,
                                    const std::vector<int>& rows) {
    MeasurementModel full = measurement_matrix(c, slack_bus);
    MeasurementModel mm;
    mm.slack_bus = slack_bus;
    mm.n = full.n;
    mm.l = full.l;
    mm.m = static_cast<int>(rows.size());
    mm.H.resize(mm.m, mm.n);
    for (int i = 0; i < mm.m; ++i) {
        if (rows[i] < 0 || rows[i] >= full.m)
            throw ValidationError("row selection out of range");
        mm.H.row(i) = full.H.row(rows[i]);
        mm.row_labels.push_back(full.row_labels[rows[i]]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(mm.H);
    if (qr.rank() < mm.n)
        throw ValidationError("selected rows leave the system unobservable");
    return mm;
}

std::set<int> single_branch_buses(const GridCase& c) {
    std::vector<int> degree(c.n_buses + 1, 0);
    for (const auto& b : c.branches) {
        ++degree[b.from_bus];
        ++degree[b.to_bus];
    }
    std::set<int> out;
    for (int i = 1; i <= c.n_buses; ++i)
        if (degree[i] == 1) out.insert(i);
    return out;
}

std::set<int> covered_buses(const GridCase& c, const std::vector<int>& branch_indices) {
    std::set<int> out;
    for (int k : branch_indices) {
        if (k < 1 || k > c.n_branches())
            throw ValidationError("branch index out of range: " + std::to_string(k));
        out.insert(c.branches[k - 1].from_bus);
        out.insert(c.branches[k - 1].to_bus);
    }
    return out;
}

}  // namespace mtdgrid
