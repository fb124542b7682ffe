#include "helios/trt.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <stdexcept>

#include "helios/evaluator.hpp"

namespace helios {

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::runtime_error(msg); }

Segment slice_from(const std::vector<SegmentPart>& parts, std::size_t j, std::size_t jo) {
    Segment s;
    for (std::size_t k = j; k < parts.size(); ++k) {
        SegmentPart p = parts[k];
        if (k == j && p.is_static && jo > 0)
            p.tokens.assign(parts[k].tokens.begin() + static_cast<std::ptrdiff_t>(jo),
                            parts[k].tokens.end());
        s.parts.push_back(std::move(p));
    }
    s.normalize();
    return s;
}

Segment slice_prefix(const std::vector<SegmentPart>& parts, std::size_t i, std::size_t io) {
    Segment s;
    for (std::size_t k = 0; k < i; ++k) s.parts.push_back(parts[k]);
    if (io > 0) {
        SegmentPart p = parts[i];
        p.tokens.assign(parts[i].tokens.begin(), parts[i].tokens.begin() + static_cast<std::ptrdiff_t>(io));
        s.parts.push_back(std::move(p));
    }
    s.normalize();
    return s;
}

}  // namespace

double Segment::weight() const {
    double w = 0;
    for (const SegmentPart& p : parts) w += p.weight();
    return w;
}

std::size_t Segment::static_token_count() const {
    std::size_t n = 0;
    for (const SegmentPart& p : parts)
        if (p.is_static) n += p.tokens.size();
    return n;
}

bool Segment::all_static() const {
    return std::all_of(parts.begin(), parts.end(), [](const SegmentPart& p) { return p.is_static; });
}

void Segment::normalize() {
    std::vector<SegmentPart> out;
    for (SegmentPart& p : parts) {
        if (p.is_static && p.tokens.empty()) continue;
        if (p.is_static && !out.empty() && out.back().is_static) {
            out.back().tokens.insert(out.back().tokens.end(), p.tokens.begin(), p.tokens.end());
        } else {
            out.push_back(std::move(p));
        }
    }
    parts = std::move(out);
}

TemplatedRadixTree::TemplatedRadixTree() {
    pool_.emplace_back();  // root: empty segment, weight 0
}

int TemplatedRadixTree::new_node() {
    int id = static_cast<int>(pool_.size());
    pool_.emplace_back();
    pool_.back().id = id;
    return id;
}

int TemplatedRadixTree::leaf_index(NodeId op, int query) const {
    auto it = leaf_index_.find({op, query});
    return it == leaf_index_.end() ? -1 : it->second;
}

int TemplatedRadixTree::insert(Segment path, TrtLeaf payload) {
    path.normalize();
    int cur = root();
    std::size_t j = 0, jo = 0;  // cursor into path.parts

    while (true) {
        if (j == path.parts.size()) {
            int lf = new_node();
            TrtNode& l = pool_[static_cast<std::size_t>(lf)];
            l.parent = cur;
            l.depth = pool_[static_cast<std::size_t>(cur)].depth + 1;
            l.is_leaf = true;
            l.leaf = payload;
            pool_[static_cast<std::size_t>(cur)].children.push_back(lf);
            leaves_.push_back(lf);
            if (!leaf_index_.emplace(std::make_pair(payload.op, payload.query), lf).second)
                fail("duplicate leaf for op " + std::to_string(payload.op));
            return lf;
        }

        // find the (unique) child whose first part matches the path head
        const SegmentPart& head = path.parts[j];
        int match = -1;
        for (int ch : pool_[static_cast<std::size_t>(cur)].children) {
            const TrtNode& c = pool_[static_cast<std::size_t>(ch)];
            if (c.is_leaf || c.seg.parts.empty()) continue;
            const SegmentPart& first = c.seg.parts[0];
            bool hit = head.is_static
                           ? (first.is_static && first.tokens[0] == head.tokens[jo])
                           : first.same_placeholder(head);
            if (hit) {
                match = ch;
                break;
            }
        }

        if (match < 0) {
            int mid = new_node();
            TrtNode& m = pool_[static_cast<std::size_t>(mid)];
            m.parent = cur;
            m.depth = pool_[static_cast<std::size_t>(cur)].depth + 1;
            m.seg = slice_from(path.parts, j, jo);
            pool_[static_cast<std::size_t>(cur)].children.push_back(mid);
            cur = mid;
            j = path.parts.size();
            jo = 0;
            continue;  // attach leaf under the fresh node
        }

        // walk the longest common run of the child's segment and the remaining path
        const std::vector<SegmentPart>& cp = pool_[static_cast<std::size_t>(match)].seg.parts;
        std::size_t i = 0, io = 0;
        while (i < cp.size() && j < path.parts.size()) {
            const SegmentPart& a = cp[i];
            const SegmentPart& b = path.parts[j];
            if (a.is_static && b.is_static) {
                std::size_t n = 0;
                while (io + n < a.tokens.size() && jo + n < b.tokens.size() &&
                       a.tokens[io + n] == b.tokens[jo + n])
                    ++n;
                io += n;
                jo += n;
                bool a_end = (io == a.tokens.size());
                bool b_end = (jo == b.tokens.size());
                if (a_end) {
                    ++i;
                    io = 0;
                }
                if (b_end) {
                    ++j;
                    jo = 0;
                }
                if (!a_end && !b_end) break;  // diverged mid-static
            } else if (a.same_placeholder(b)) {
                ++i;
                ++j;
            } else {
                break;  // kind mismatch or different placeholder
            }
        }

        if (i == cp.size()) {
            cur = match;  // consumed the whole child segment; descend
            continue;
        }

        // diverged inside the child: split it at (i, io)
        Segment head_seg = slice_prefix(cp, i, io);   // slice before new_node(): the
        Segment tail_seg = slice_from(cp, i, io);     // pool may reallocate under cp
        int pre = new_node();
        TrtNode& child = pool_[static_cast<std::size_t>(match)];
        TrtNode& prefix = pool_[static_cast<std::size_t>(pre)];
        prefix.seg = std::move(head_seg);
        prefix.parent = child.parent;
        prefix.depth = child.depth;
        prefix.children.push_back(match);
        TrtNode& parent = pool_[static_cast<std::size_t>(child.parent)];
        *std::find(parent.children.begin(), parent.children.end(), match) = pre;
        child.seg = std::move(tail_seg);
        child.parent = pre;
        // the split pushed the child's subtree one level down
        std::vector<int> stack{match};
        while (!stack.empty()) {
            int n = stack.back();
            stack.pop_back();
            pool_[static_cast<std::size_t>(n)].depth++;
            for (int ch : pool_[static_cast<std::size_t>(n)].children) stack.push_back(ch);
        }
        cur = pre;
        // loop: path head now diverges from the child's new first part, so the
        // next round either adds a sibling branch or attaches the leaf here
    }
}

void TemplatedRadixTree::add_dependency(NodeId from_op, int from_query, NodeId to_op, int to_query) {
    int a = leaf_index(from_op, from_query);
    int b = leaf_index(to_op, to_query);
    if (a < 0 || b < 0) fail("dependency references unknown leaf");
    TrtNode& na = pool_[static_cast<std::size_t>(a)];
    TrtNode& nb = pool_[static_cast<std::size_t>(b)];
    if (std::find(na.succs.begin(), na.succs.end(), b) == na.succs.end()) {
        na.succs.push_back(b);
        nb.preds.push_back(a);
    }
}

double TemplatedRadixTree::weight_below(int ancestor, int n) const {
    double w = 0;
    int cur = n;
    while (cur != ancestor) {
        if (cur < 0) fail("weight_below: not an ancestor");
        w += node_weight(cur);
        cur = pool_[static_cast<std::size_t>(cur)].parent;
    }
    return w;
}

int TemplatedRadixTree::lca(int a, int b) const {
    while (pool_[static_cast<std::size_t>(a)].depth > pool_[static_cast<std::size_t>(b)].depth)
        a = pool_[static_cast<std::size_t>(a)].parent;
    while (pool_[static_cast<std::size_t>(b)].depth > pool_[static_cast<std::size_t>(a)].depth)
        b = pool_[static_cast<std::size_t>(b)].parent;
    while (a != b) {
        a = pool_[static_cast<std::size_t>(a)].parent;
        b = pool_[static_cast<std::size_t>(b)].parent;
    }
    return a;
}

double TemplatedRadixTree::prefill_weight(int prev_leaf, int leaf) const {
    if (prev_leaf < 0) return root_path_weight(leaf);
    return weight_below(lca(prev_leaf, leaf), leaf);
}

std::vector<int> TemplatedRadixTree::path_from_root(int n) const {
    std::vector<int> path;
    for (int cur = n; cur >= 0; cur = pool_[static_cast<std::size_t>(cur)].parent)
        path.push_back(cur);
    std::reverse(path.begin(), path.end());
    return path;
}

std::vector<SegmentPart> TemplatedRadixTree::root_path_parts(int leaf) const {
    Segment s;
    for (int n : path_from_root(leaf))
        for (const SegmentPart& p : pool_[static_cast<std::size_t>(n)].seg.parts)
            s.parts.push_back(p);
    s.normalize();
    return s.parts;
}

void TemplatedRadixTree::check_invariants() const {
    for (const TrtNode& n : pool_) {
        for (int ch : n.children) {
            const TrtNode& c = pool_[static_cast<std::size_t>(ch)];
            if (c.parent != n.id) fail("parent link broken");
            if (c.depth != n.depth + 1) fail("depth broken");
        }
        // radix property: non-leaf children diverge at their first part
        for (std::size_t x = 0; x < n.children.size(); ++x) {
            for (std::size_t y = x + 1; y < n.children.size(); ++y) {
                const TrtNode& a = pool_[static_cast<std::size_t>(n.children[x])];
                const TrtNode& b = pool_[static_cast<std::size_t>(n.children[y])];
                if (a.is_leaf || b.is_leaf) continue;
                const SegmentPart& pa = a.seg.parts.at(0);
                const SegmentPart& pb = b.seg.parts.at(0);
                if (pa.is_static && pb.is_static && pa.tokens[0] == pb.tokens[0])
                    fail("siblings share a static first token");
                if (pa.same_placeholder(pb)) fail("siblings share a placeholder head");
            }
        }
        if (n.is_leaf && (!n.children.empty() || !n.seg.parts.empty()))
            fail("leaf must be empty");
        if (!n.is_leaf && n.id != 0 && n.seg.parts.empty()) fail("empty internal segment");
        for (const SegmentPart& p : n.seg.parts)
            if (p.is_static && p.tokens.empty()) fail("empty static part");
        for (std::size_t x = 1; x < n.seg.parts.size(); ++x)
            if (n.seg.parts[x - 1].is_static && n.seg.parts[x].is_static)
                fail("segment not normalized");
    }
    for (int lf : leaves_)
        if (!pool_[static_cast<std::size_t>(lf)].is_leaf) fail("leaf list corrupt");
}

std::string TemplatedRadixTree::dump() const {
    std::ostringstream os;
    std::vector<std::pair<int, int>> stack{{0, 0}};
    while (!stack.empty()) {
        auto [n, ind] = stack.back();
        stack.pop_back();
        const TrtNode& t = pool_[static_cast<std::size_t>(n)];
        os << std::string(static_cast<std::size_t>(ind) * 2, ' ') << "#" << n;
        if (t.is_leaf) {
            os << " leaf op=" << t.leaf.op << " q=" << t.leaf.query << " w" << t.leaf.worker;
        } else {
            os << " [";
            for (const SegmentPart& p : t.seg.parts) {
                if (p.is_static)
                    os << " s:" << p.tokens.size();
                else
                    os << " ph:" << p.source << (p.query >= 0 ? "@" + std::to_string(p.query) : "")
                       << "~" << p.est_len;
            }
            os << " ] w=" << t.seg.weight();
        }
        os << "\n";
        for (auto it = t.children.rbegin(); it != t.children.rend(); ++it)
            stack.push_back({*it, ind + 1});
    }
    return os.str();
}

// --- template construction -------------------------------------------------

namespace {

// does the node's value depend on any llm output?
std::map<NodeId, bool> llm_upstream_map(const WorkflowGraph& g) {
    std::map<NodeId, bool> up;
    for (NodeId id : topo_sort(g)) {
        bool v = g.op(id).kind == OpKind::kLlm;
        for (NodeId in : g.inputs_of(id)) v = v || up.at(in);
        up[id] = v;
    }
    return up;
}

struct TemplateBuilder {
    const CompiledGraph& c;
    const ProfileStats& profile;
    int query;  // -1 = operator level
    std::map<NodeId, bool> llm_up;
    Evaluator eval;  // strict: only pre-run-known values may be pulled

    TemplateBuilder(const CompiledGraph& c_, const ProfileStats& p_, int q_)
        : c(c_), profile(p_), query(q_), llm_up(llm_upstream_map(c_.graph)),
          eval(c_, p_, EvalOptions{0, false, /*strict_llm=*/true}) {}

    void add_static(Segment& seg, TokenSeq t) {
        if (!t.empty()) seg.parts.push_back(SegmentPart::statics(std::move(t)));
    }

    void expand_ref(Segment& seg, NodeId id) {
        const Operator& n = c.graph.op(id);
        if (query >= 0 && !llm_up.at(id)) {
            // concrete pre-run value: inline as shared-able static tokens
            add_static(seg, eval.value(id, static_cast<std::size_t>(query)));
            return;
        }
        if (n.kind == OpKind::kOutput) {
            expand_ref(seg, c.graph.inputs_of(id)[0]);
            return;
        }
        if (n.kind == OpKind::kFormat) {
            std::vector<NodeId> ins = c.graph.inputs_of(id);
            const std::string& t = n.template_text;
            std::string lit;
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t[i] == '{') {
                    std::size_t close = t.find('}', i);
                    int slot = std::stoi(t.substr(i + 1, close - i - 1));
                    add_static(seg, tokenize(lit));
                    lit.clear();
                    expand_ref(seg, ins[static_cast<std::size_t>(slot)]);
                    i = close;
                } else {
                    lit.push_back(t[i]);
                }
            }
            add_static(seg, tokenize(lit));
            return;
        }
        seg.parts.push_back(
            SegmentPart::placeholder(id, query, estimated_len(c, profile, id, query)));
    }

    Segment llm_template(NodeId llm) {
        const Operator& n = c.graph.op(llm);
        Segment seg;
        for (int role = 0; role < 3; ++role) {
            for (const Message& m : n.messages) {
                if (static_cast<int>(m.role) != role) continue;
                add_static(seg, {role_marker(m.role)});
                for (const MessagePart& p : m.parts) {
                    if (p.is_ref)
                        expand_ref(seg, p.ref);
                    else
                        add_static(seg, tokenize(p.text));
                }
            }
        }
        seg.normalize();
        return seg;
    }
};

}  // namespace

double estimated_len(const CompiledGraph& c, const ProfileStats& profile, NodeId id, int query) {
    const Operator& n = c.graph.op(id);
    switch (n.kind) {
        case OpKind::kInput:
        case OpKind::kData:
        case OpKind::kCacheFetch: {
            const auto& vals = c.bound.at(id);
            if (query >= 0) return static_cast<double>(vals[static_cast<std::size_t>(query)].size());
            double s = 0;
            for (const TokenSeq& v : vals) s += static_cast<double>(v.size());
            return s / static_cast<double>(vals.size());
        }
        case OpKind::kLlm: {
            auto it = profile.find(id);
            if (it == profile.end())
                fail("no profile entry for llm node " + std::to_string(id));
            return it->second.len_out;
        }
        case OpKind::kOutput:
            return estimated_len(c, profile, c.graph.inputs_of(id)[0], query);
        case OpKind::kFormat: {
            std::vector<NodeId> ins = c.graph.inputs_of(id);
            const std::string& t = n.template_text;
            double total = 0;
            std::string lit;
            for (std::size_t i = 0; i < t.size(); ++i) {
                if (t[i] == '{') {
                    std::size_t close = t.find('}', i);
                    int slot = std::stoi(t.substr(i + 1, close - i - 1));
                    total += static_cast<double>(tokenize(lit).size());
                    lit.clear();
                    total += estimated_len(c, profile, ins[static_cast<std::size_t>(slot)], query);
                    i = close;
                } else {
                    lit.push_back(t[i]);
                }
            }
            return total + static_cast<double>(tokenize(lit).size());
        }
        case OpKind::kLambda: {
            std::vector<double> ins;
            for (NodeId in : c.graph.inputs_of(id))
                ins.push_back(estimated_len(c, profile, in, query));
            return lambda_estimate(n.fn, ins);
        }
    }
    fail("bad kind");
}

Segment prefix_template(const CompiledGraph& c, const ProfileStats& profile, NodeId llm, int query) {
    if (c.graph.op(llm).kind != OpKind::kLlm) fail("prefix_template: not an llm node");
    TemplateBuilder b(c, profile, query);
    return b.llm_template(llm);
}

std::vector<NodeId> llm_ops_topo(const WorkflowGraph& g) {
    std::vector<NodeId> out;
    for (NodeId id : topo_sort(g))
        if (g.op(id).kind == OpKind::kLlm) out.push_back(id);
    return out;
}

std::map<NodeId, std::vector<NodeId>> llm_dependencies(const WorkflowGraph& g) {
    std::map<NodeId, std::set<NodeId>> nearest;  // nearest upstream llm ops per node
    std::map<NodeId, std::vector<NodeId>> deps;
    for (NodeId id : topo_sort(g)) {
        const Operator& n = g.op(id);
        std::set<NodeId> up;
        for (NodeId in : g.inputs_of(id))
            up.insert(nearest.at(in).begin(), nearest.at(in).end());
        if (n.kind == OpKind::kLlm) {
            deps[id] = {up.begin(), up.end()};
            nearest[id] = {id};
        } else {
            nearest[id] = std::move(up);
        }
    }
    return deps;
}

namespace {

TemplatedRadixTree build_tree(const CompiledGraph& c, const ProfileStats& profile,
                              const std::map<NodeId, int>& worker_of, bool call_level) {
    TemplatedRadixTree tree;
    std::vector<NodeId> ops = llm_ops_topo(c.graph);
    std::map<NodeId, std::vector<NodeId>> deps = llm_dependencies(c.graph);
    int queries = call_level ? static_cast<int>(c.batch) : 1;
    for (NodeId op : ops) {
        auto wit = worker_of.find(op);
        if (wit == worker_of.end()) fail("no worker assignment for llm op " + std::to_string(op));
        const Operator& n = c.graph.op(op);
        for (int q = 0; q < queries; ++q) {
            int query = call_level ? q : -1;
            TrtLeaf leaf;
            leaf.op = op;
            leaf.query = query;
            leaf.worker = wit->second;
            leaf.len_out = estimated_len(c, profile, op, query);
            leaf.deterministic = n.deterministic;
            tree.insert(prefix_template(c, profile, op, query), leaf);
        }
    }
    for (NodeId op : ops)
        for (NodeId p : deps.at(op))
            for (int q = 0; q < queries; ++q) {
                int query = call_level ? q : -1;
                tree.add_dependency(p, query, op, query);
            }
    tree.check_invariants();
    return tree;
}

}  // namespace

TemplatedRadixTree build_operator_tree(const CompiledGraph& c, const ProfileStats& profile,
                                       const std::map<NodeId, int>& worker_of) {
    return build_tree(c, profile, worker_of, false);
}

TemplatedRadixTree build_call_tree(const CompiledGraph& c, const ProfileStats& profile,
                                   const std::map<NodeId, int>& worker_of) {
    return build_tree(c, profile, worker_of, true);
}

}  // namespace helios
