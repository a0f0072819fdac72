#include "mtdgrid/perturbation.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace mtdgrid {

std::vector<int> PerturbationPlan::branch_indices() const {
    std::vector<int> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.branch);
    return out;
}

void validate_plan(const GridCase& c, const PerturbationPlan& plan) {
    std::set<int> seen;
    for (const auto& e : plan.entries) {
        if (e.branch < 1 || e.branch > c.n_branches())
            throw ValidationError("plan branch index out of range: " + std::to_string(e.branch));
        if (!seen.insert(e.branch).second)
            throw ValidationError("duplicate plan branch: " + std::to_string(e.branch));
        if (e.lambda < plan.lambda_min || e.lambda > plan.lambda_max)
            throw ValidationError("ratio " + std::to_string(e.lambda) + " outside bounds [" +
                                  std::to_string(plan.lambda_min) + ", " +
                                  std::to_string(plan.lambda_max) + "]");
        if (e.lambda == 1.0)
            throw ValidationError("ratio 1 on branch " + std::to_string(e.branch) +
                                  " is no perturbation");
    }
}

GridCase apply_plan(const GridCase& c, const PerturbationPlan& plan) {
    validate_plan(c, plan);
    GridCase out = c;
    for (const auto& e : plan.entries)
        out.branches[e.branch - 1].susceptance *= e.lambda;
    validate_case(out);
    return out;
}

PerturbationPlan plan_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    PerturbationPlan plan;
    if (j.contains("lambda_min")) plan.lambda_min = j["lambda_min"].get<double>();
    if (j.contains("lambda_max")) plan.lambda_max = j["lambda_max"].get<double>();
    for (const auto& e : j.at("entries"))
        plan.entries.push_back({e.at("branch").get<int>(), e.at("lambda").get<double>()});
    return plan;
}

std::string plan_to_json(const PerturbationPlan& plan) {
    nlohmann::json j;
    j["lambda_min"] = plan.lambda_min;
    j["lambda_max"] = plan.lambda_max;
    j["entries"] = nlohmann::json::array();
    for (const auto& e : plan.entries)
        j["entries"].push_back({{"branch", e.branch}, {"lambda", e.lambda}});
    return j.dump(2);
}

PerturbationPlan load_plan_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open plan file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return plan_from_json(buf.str());
}

}  // namespace mtdgrid
