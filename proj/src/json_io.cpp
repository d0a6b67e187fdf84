#include "fairmdp/json_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fairmdp {

namespace {

using nlohmann::json;

json parse_document(const std::string& text) {
    json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw ValidationError("malformed JSON document");
    return doc;
}

json read_document(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_document(buf.str());
}

const json& field(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) throw ValidationError(std::string("missing field: ") + name);
    return *it;
}

double number_at(const json& value, const std::string& where) {
    if (!value.is_number()) throw ValidationError(where + ": expected a number");
    return value.get<double>();
}

int integer_at(const json& value, const std::string& where) {
    if (!value.is_number_integer()) throw ValidationError(where + ": expected an integer");
    return value.get<int>();
}

TabularMdp from_json(const json& doc) {
    TabularMdp mdp;
    mdp.n_states = integer_at(field(doc, "n_states"), "n_states");
    mdp.n_actions = integer_at(field(doc, "n_actions"), "n_actions");
    mdp.discount = number_at(field(doc, "discount"), "discount");
    if (mdp.n_states <= 0) throw ValidationError("n_states: must be positive");
    if (mdp.n_actions <= 0) throw ValidationError("n_actions: must be positive");

    const json& initial = field(doc, "initial");
    if (!initial.is_array() || int(initial.size()) != mdp.n_states)
        throw ValidationError("initial: expected an array of length n_states");
    mdp.initial.resize(mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s)
        mdp.initial(s) = number_at(initial[std::size_t(s)], "initial[" + std::to_string(s) + "]");

    const json& trans = field(doc, "transitions");
    if (!trans.is_array() || int(trans.size()) != mdp.n_states)
        throw ValidationError("transitions: expected n_states rows");
    mdp.transitions.assign(std::size_t(mdp.n_actions),
                           Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states));
    for (int s = 0; s < mdp.n_states; ++s) {
        const json& row = trans[std::size_t(s)];
        if (!row.is_array() || int(row.size()) != mdp.n_actions)
            throw ValidationError("transitions[" + std::to_string(s) +
                                  "]: expected n_actions rows");
        for (int a = 0; a < mdp.n_actions; ++a) {
            const json& dist = row[std::size_t(a)];
            const std::string where =
                "transitions[" + std::to_string(s) + "][" + std::to_string(a) + "]";
            if (!dist.is_array() || int(dist.size()) != mdp.n_states)
                throw ValidationError(where + ": expected an array of length n_states");
            for (int s2 = 0; s2 < mdp.n_states; ++s2)
                mdp.transitions[std::size_t(a)](s, s2) =
                    number_at(dist[std::size_t(s2)], where + "[" + std::to_string(s2) + "]");
        }
    }

    auto load_table = [&](const char* name) {
        const json& table = field(doc, name);
        if (!table.is_array() || int(table.size()) != mdp.n_states)
            throw ValidationError(std::string(name) + ": expected n_states rows");
        Eigen::MatrixXd out(mdp.n_states, mdp.n_actions);
        for (int s = 0; s < mdp.n_states; ++s) {
            const json& row = table[std::size_t(s)];
            const std::string where = std::string(name) + "[" + std::to_string(s) + "]";
            if (!row.is_array() || int(row.size()) != mdp.n_actions)
                throw ValidationError(where + ": expected n_actions entries");
            for (int a = 0; a < mdp.n_actions; ++a)
                out(s, a) = number_at(row[std::size_t(a)], where + "[" + std::to_string(a) + "]");
        }
        return out;
    };
    mdp.reward = load_table("reward");
    mdp.agent_reward = load_table("agent_reward");

    const json& groups = field(doc, "group_of");
    if (!groups.is_array() || int(groups.size()) != mdp.n_states)
        throw ValidationError("group_of: expected an array of length n_states");
    mdp.group_of.resize(std::size_t(mdp.n_states));
    for (int s = 0; s < mdp.n_states; ++s) {
        const json& g = groups[std::size_t(s)];
        const std::string where = "group_of[" + std::to_string(s) + "]";
        if (!g.is_string()) throw ValidationError(where + ": expected \"maj\" or \"min\"");
        const std::string name = g.get<std::string>();
        if (name == "maj")
            mdp.group_of[std::size_t(s)] = Group::Maj;
        else if (name == "min")
            mdp.group_of[std::size_t(s)] = Group::Min;
        else
            throw ValidationError(where + ": expected \"maj\" or \"min\", got \"" + name + "\"");
    }

    mdp.validate();
    return mdp;
}

LoanParams loan_from_json(const json& doc) {
    LoanParams params;
    auto opt_number = [&](const char* name, double& out) {
        if (doc.contains(name)) out = number_at(doc.at(name), name);
    };
    auto opt_integer = [&](const char* name, int& out) {
        if (doc.contains(name)) out = integer_at(doc.at(name), name);
    };
    opt_number("I", params.interest);
    opt_number("p_Z", params.p_minority);
    opt_number("alpha_maj", params.alpha_maj);
    opt_number("beta_maj", params.beta_maj);
    opt_number("alpha_min", params.alpha_min);
    opt_number("beta_min", params.beta_min);
    opt_number("lambda", params.risk_weight);
    opt_number("tau", params.denial_penalty);
    opt_number("epsilon", params.epsilon);
    opt_integer("T", params.horizon);
    opt_integer("T_maj", params.forced_maj);
    opt_integer("T_min", params.forced_min);
    opt_number("discount", params.discount);
    opt_number("p0", params.qualify_threshold);
    params.validate();
    return params;
}

} // namespace

TabularMdp load_tabular_mdp(const std::string& path) { return from_json(read_document(path)); }

TabularMdp parse_tabular_mdp(const std::string& json_text) {
    return from_json(parse_document(json_text));
}

LoanParams load_loan_params(const std::string& path) {
    return loan_from_json(read_document(path));
}

LoanParams parse_loan_params(const std::string& json_text) {
    return loan_from_json(parse_document(json_text));
}

} // namespace fairmdp
