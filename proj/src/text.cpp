#include "bt/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <memory>
#include <set>
#include <sstream>
#include <utility>

#include "bt/engine.hpp"
#include "bt/error.hpp"
#include "bt/statespace.hpp"
#include "bt/statespace_models.hpp"

namespace bt::text {

namespace {

// ---------------------------------------------------------------------------
// Small formatting helpers
// ---------------------------------------------------------------------------

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

bool is_word(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_';
    });
}

std::string strip_var(const std::string& arg) {
    return (!arg.empty() && arg[0] == '?') ? arg.substr(1) : arg;
}

/// "name(a,b)" with variable markers stripped — matches Fluent::key() for
/// ground atoms, so init facts can be echoed verbatim.
std::string atom_text(const bt::plan::Fluent& f) {
    std::string out = f.name;
    if (!f.args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < f.args.size(); ++i) {
            if (i) out += ',';
            out += strip_var(f.args[i]);
        }
        out += ')';
    }
    return out;
}

std::string signed_atom_text(const bt::plan::Fluent& f) {
    return f.negated ? "-" + atom_text(f) : atom_text(f);
}

nlohmann::json opt_num(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok {
    Word, Number, Str,
    LBrace, RBrace, LParen, RParen,
    Semi, Comma, Colon, Pipe, Star, Plus, Minus, Arrow,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int col = 1;
};

const char* tok_name(Tok t) {
    switch (t) {
        case Tok::Word: return "name";
        case Tok::Number: return "number";
        case Tok::Str: return "string";
        case Tok::LBrace: return "'{'";
        case Tok::RBrace: return "'}'";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::Semi: return "';'";
        case Tok::Comma: return "','";
        case Tok::Colon: return "':'";
        case Tok::Pipe: return "'|'";
        case Tok::Star: return "'*'";
        case Tok::Plus: return "'+'";
        case Tok::Minus: return "'-'";
        case Tok::Arrow: return "'->'";
        case Tok::End: return "end of input";
    }
    return "?";
}

[[noreturn]] void syntax_error(int line, int col, const std::string& msg) {
    throw Error(Errc::SyntaxError,
                std::to_string(line) + ":" + std::to_string(col) + ": " + msg);
}

std::vector<Token> lex(const std::string& input) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](char c) {
        if (c == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    };
    while (i < input.size()) {
        char c = input[i];
        if (c == '#') {
            while (i < input.size() && input[i] != '\n') advance(input[i++]);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(c);
            ++i;
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (i < input.size() &&
                   (std::isalnum(static_cast<unsigned char>(input[i])) || input[i] == '_')) {
                t.text += input[i];
                advance(input[i++]);
            }
            t.kind = Tok::Word;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            bool seen_exp = false;
            while (i < input.size()) {
                char d = input[i];
                bool take = std::isdigit(static_cast<unsigned char>(d)) || d == '.';
                if ((d == 'e' || d == 'E') && !seen_exp) {
                    take = true;
                    seen_exp = true;
                } else if ((d == '+' || d == '-') && !t.text.empty() &&
                           (t.text.back() == 'e' || t.text.back() == 'E')) {
                    take = true;
                }
                if (!take) break;
                t.text += d;
                advance(input[i++]);
            }
            t.kind = Tok::Number;
        } else if (c == '"') {
            advance(c);
            ++i;
            while (i < input.size() && input[i] != '"') {
                if (input[i] == '\\' && i + 1 < input.size()) {
                    advance(input[i++]);
                }
                if (input[i] == '\n') syntax_error(t.line, t.col, "unterminated string");
                t.text += input[i];
                advance(input[i++]);
            }
            if (i >= input.size()) syntax_error(t.line, t.col, "unterminated string");
            advance(input[i++]);  // closing quote
            t.kind = Tok::Str;
        } else {
            switch (c) {
                case '{': t.kind = Tok::LBrace; break;
                case '}': t.kind = Tok::RBrace; break;
                case '(': t.kind = Tok::LParen; break;
                case ')': t.kind = Tok::RParen; break;
                case ';': t.kind = Tok::Semi; break;
                case ',': t.kind = Tok::Comma; break;
                case ':': t.kind = Tok::Colon; break;
                case '|': t.kind = Tok::Pipe; break;
                case '*': t.kind = Tok::Star; break;
                case '+': t.kind = Tok::Plus; break;
                case '-':
                    if (i + 1 < input.size() && input[i + 1] == '>') {
                        t.kind = Tok::Arrow;
                        t.text = "->";
                        advance(input[i++]);
                    } else {
                        t.kind = Tok::Minus;
                    }
                    break;
                default:
                    syntax_error(line, col,
                                 std::string("unexpected character '") + c + "'");
            }
            t.text += c;
            advance(input[i++]);
        }
        out.push_back(std::move(t));
    }
    Token end;
    end.kind = Tok::End;
    end.line = line;
    end.col = col;
    out.push_back(end);
    return out;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
public:
    explicit Parser(std::string input) : tokens_(lex(input)) {}

    BTDocument parse_document() {
        BTDocument doc;
        while (peek().kind != Tok::End) {
            const Token& t = peek();
            if (t.kind != Tok::Word)
                syntax_error(t.line, t.col,
                             std::string("expected a section or tree, found ") + tok_name(t.kind));
            const std::string& w = t.text;
            if (w == "unit") {
                parse_unit(doc);
            } else if (w == "seed") {
                parse_seed(doc);
            } else if (w == "tree") {
                require_absent(static_cast<bool>(doc.root), t, "tree");
                next();
                if (peek().kind == Tok::Word) doc.tree_name = next().text;
                expect(Tok::LBrace, "after the tree name");
                doc.root = parse_node();
                expect(Tok::RBrace, "to close the tree");
            } else if (is_node_keyword(w)) {
                require_absent(static_cast<bool>(doc.root), t, "tree");
                doc.root = parse_node();
            } else if (w == "profiles") {
                require_absent(!doc.profiles.empty(), t, "profiles");
                parse_profiles(doc);
            } else if (w == "scripts") {
                require_absent(!doc.scripts.empty(), t, "scripts");
                parse_scripts(doc);
            } else if (w == "statespace") {
                require_absent(doc.system.has_value(), t, "statespace");
                parse_statespace(doc);
            } else if (w == "domain") {
                require_absent(doc.problem.has_value(), t, "domain");
                parse_domain(doc);
            } else if (w == "decision_tree") {
                require_absent(doc.dtree.has_value(), t, "decision_tree");
                next();
                expect(Tok::LBrace, "after 'decision_tree'");
                doc.dtree = parse_dt();
                expect(Tok::RBrace, "to close the decision tree");
            } else if (w == "subsumption") {
                require_absent(doc.stack.has_value(), t, "subsumption");
                parse_subsumption(doc);
            } else if (w == "teleo_reactive") {
                require_absent(doc.tr.has_value(), t, "teleo_reactive");
                parse_tr(doc);
            } else if (w == "fsm") {
                require_absent(doc.fsm.has_value(), t, "fsm");
                parse_fsm(doc);
            } else {
                syntax_error(t.line, t.col, "unknown section '" + w + "'");
            }
        }
        finalize(doc);
        return doc;
    }

private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    const Token& next() { return tokens_[std::min(pos_++, tokens_.size() - 1)]; }

    const Token& expect(Tok kind, const std::string& where) {
        const Token& t = peek();
        if (t.kind != kind)
            syntax_error(t.line, t.col, std::string("expected ") + tok_name(kind) + " " + where +
                                            ", found " + tok_name(t.kind) +
                                            (t.text.empty() ? "" : " '" + t.text + "'"));
        return next();
    }

    std::string expect_word(const std::string& where) { return expect(Tok::Word, where).text; }

    static void require_absent(bool present, const Token& t, const std::string& what) {
        if (present) syntax_error(t.line, t.col, "duplicate " + what + " section");
    }

    /// Leaf statements end with ';'; the one right before '}' may omit it.
    void leaf_terminator() {
        if (peek().kind == Tok::Semi) {
            next();
            return;
        }
        if (peek().kind == Tok::RBrace) return;
        const Token& t = peek();
        syntax_error(t.line, t.col,
                     std::string("expected ';', found ") + tok_name(t.kind));
    }

    double number(const std::string& where) {
        const Token& t = expect(Tok::Number, where);
        return std::strtod(t.text.c_str(), nullptr);
    }

    long integer(const std::string& where) {
        const Token& t = expect(Tok::Number, where);
        if (t.text.find_first_not_of("0123456789") != std::string::npos)
            syntax_error(t.line, t.col, "expected an integer " + where);
        return std::strtol(t.text.c_str(), nullptr, 10);
    }

    // -- tree ----------------------------------------------------------------

    static bool is_node_keyword(const std::string& w) {
        return w == "fallback" || w == "sequence" || w == "parallel" || w == "decorator" ||
               w == "action" || w == "condition";
    }

    NodePtr parse_node() {
        const Token& t = peek();
        if (t.kind != Tok::Word)
            syntax_error(t.line, t.col,
                         std::string("expected a node, found ") + tok_name(t.kind));
        const std::string w = next().text;
        if (w == "action" || w == "condition") {
            std::string ref = expect_word("after '" + w + "'");
            leaf_terminator();
            auto node = std::make_unique<BTNode>();
            node->kind = (w == "action") ? NodeKind::Action : NodeKind::Condition;
            node->ref = ref;
            return node;
        }
        auto node = std::make_unique<BTNode>();
        if (w == "fallback" || w == "sequence") {
            bool memory = false;
            if (peek().kind == Tok::Star) {
                next();
                memory = true;
            }
            node->kind = (w == "fallback")
                             ? (memory ? NodeKind::FallbackMemory : NodeKind::Fallback)
                             : (memory ? NodeKind::SequenceMemory : NodeKind::Sequence);
        } else if (w == "parallel") {
            expect(Tok::LParen, "after 'parallel'");
            node->kind = NodeKind::Parallel;
            node->parallel_m = static_cast<int>(integer("as the parallel threshold"));
            expect(Tok::RParen, "after the parallel threshold");
        } else if (w == "decorator") {
            expect(Tok::LParen, "after 'decorator'");
            node->kind = NodeKind::Decorator;
            node->policy = parse_policy();
            expect(Tok::RParen, "after the decorator policy");
            expect(Tok::LBrace, "to open the decorator child");
            node->children.push_back(parse_node());
            expect(Tok::RBrace, "to close the decorator");
            return node;
        } else {
            syntax_error(t.line, t.col, "expected a node, found '" + w + "'");
        }
        expect(Tok::LBrace, "to open the child list");
        while (peek().kind != Tok::RBrace && peek().kind != Tok::End)
            node->children.push_back(parse_node());
        expect(Tok::RBrace, "to close the child list");
        return node;
    }

    DecoratorPolicy parse_policy() {
        const Token& t = peek();
        std::string w = expect_word("as the decorator policy");
        if (w == "invert") return DecoratorPolicy::invert();
        if (w == "max_tries") {
            expect(Tok::Colon, "after 'max_tries'");
            return DecoratorPolicy::max_tries_of(static_cast<int>(integer("as the try count")));
        }
        if (w == "max_seconds") {
            expect(Tok::Colon, "after 'max_seconds'");
            return DecoratorPolicy::max_seconds_of(number("as the time window"));
        }
        if (w == "rule") {
            expect(Tok::Colon, "after 'rule'");
            std::string rule = expect_word("as the rule name");
            if (peek().kind == Tok::Colon) {
                next();
                const Token& arg = peek();
                if (arg.kind != Tok::Word && arg.kind != Tok::Number)
                    syntax_error(arg.line, arg.col, "expected a rule argument");
                rule += ":" + next().text;
            }
            return DecoratorPolicy::custom(rule);
        }
        syntax_error(t.line, t.col, "unknown decorator policy '" + w + "'");
    }

    // -- profiles ------------------------------------------------------------

    void parse_profiles(BTDocument& doc) {
        next();
        expect(Tok::LBrace, "after 'profiles'");
        while (peek().kind != Tok::RBrace) {
            std::string key = expect_word("as the profiled leaf");
            expect(Tok::Colon, "after the leaf name");
            std::string kind = expect_word("as the profile kind");
            std::map<std::string, double> params;
            while (peek().kind == Tok::Word) {
                const Token& p = peek();
                std::string name = next().text;
                if (name != "p_s" && name != "mu" && name != "nu" && name != "tau_s" &&
                    name != "tau_f")
                    syntax_error(p.line, p.col, "unknown profile parameter '" + name + "'");
                if (params.count(name))
                    syntax_error(p.line, p.col, "duplicate profile parameter '" + name + "'");
                params[name] = number("after '" + name + "'");
            }
            expect(Tok::Semi, "after the profile");
            auto get = [&](const char* name) {
                auto it = params.find(name);
                return it == params.end() ? 0.0 : it->second;
            };
            try {
                bt::rel::ActionProfile profile;
                if (kind == "stochastic") {
                    profile = bt::rel::ActionProfile::stochastic(get("p_s"), get("mu"), get("nu"));
                } else if (kind == "deterministic") {
                    profile = bt::rel::ActionProfile::deterministic(get("p_s"), get("tau_s"),
                                                                    get("tau_f"));
                } else if (kind == "hybrid_fixed_success") {
                    profile = bt::rel::ActionProfile::hybrid_fixed_success(get("p_s"), get("tau_s"),
                                                                           get("nu"));
                } else if (kind == "hybrid_fixed_failure") {
                    profile = bt::rel::ActionProfile::hybrid_fixed_failure(get("p_s"), get("mu"),
                                                                           get("tau_f"));
                } else if (kind == "condition") {
                    profile = bt::rel::ActionProfile::condition(get("p_s"));
                } else {
                    throw Error(Errc::InvalidProfile, "unknown profile kind '" + kind + "'");
                }
                doc.profiles[key] = profile;
            } catch (const Error& e) {
                throw Error(e.code(), key + ": " + e.what());
            }
        }
        expect(Tok::RBrace, "to close the profiles");
    }

    // -- scripts -------------------------------------------------------------

    void parse_scripts(BTDocument& doc) {
        next();
        expect(Tok::LBrace, "after 'scripts'");
        while (peek().kind != Tok::RBrace) {
            std::string key = expect_word("as the scripted leaf");
            expect(Tok::Colon, "after the leaf name");
            std::vector<Status> statuses;
            while (peek().kind == Tok::Word) {
                const Token& t = peek();
                const std::string& w = t.text;
                if (w == "S" || w == "Success") statuses.push_back(Status::Success);
                else if (w == "F" || w == "Failure") statuses.push_back(Status::Failure);
                else if (w == "R" || w == "Running") statuses.push_back(Status::Running);
                else syntax_error(t.line, t.col, "expected a status (S, F, or R), found '" + w + "'");
                next();
            }
            if (statuses.empty()) {
                const Token& t = peek();
                syntax_error(t.line, t.col, "a script needs at least one status");
            }
            expect(Tok::Semi, "after the script");
            doc.scripts[key] = std::move(statuses);
        }
        expect(Tok::RBrace, "to close the scripts");
    }

    // -- statespace ----------------------------------------------------------

    void parse_statespace(BTDocument& doc) {
        next();
        expect(Tok::LBrace, "after 'statespace'");
        while (peek().kind != Tok::RBrace) {
            const Token& t = peek();
            std::string w = expect_word("inside the statespace section");
            if (w == "system") {
                if (doc.system) syntax_error(t.line, t.col, "duplicate system entry");
                doc.system = expect_word("as the system name");
            } else if (w == "grid") {
                doc.grid = static_cast<int>(integer("as the grid density"));
            } else {
                syntax_error(t.line, t.col, "unknown statespace entry '" + w + "'");
            }
            expect(Tok::Semi, "after the entry");
        }
        expect(Tok::RBrace, "to close the statespace section");
    }

    // -- planning domain -----------------------------------------------------

    bt::plan::Fluent parse_atom() {
        bt::plan::Fluent f;
        f.name = expect_word("as an atom");
        if (peek().kind == Tok::LParen) {
            next();
            while (true) {
                f.args.push_back(expect_word("as an atom argument"));
                if (peek().kind == Tok::Comma) {
                    next();
                    continue;
                }
                break;
            }
            expect(Tok::RParen, "to close the atom");
        }
        return f;
    }

    bt::plan::Fluent parse_signed_atom() {
        bool neg = false;
        if (peek().kind == Tok::Minus) {
            next();
            neg = true;
        } else if (peek().kind == Tok::Plus) {
            next();
        }
        bt::plan::Fluent f = parse_atom();
        f.negated = neg;
        return f;
    }

    std::vector<bt::plan::Fluent> parse_signed_atom_list(const char* what) {
        std::vector<bt::plan::Fluent> out;
        out.push_back(parse_signed_atom());
        while (peek().kind == Tok::Comma) {
            next();
            out.push_back(parse_signed_atom());
        }
        expect(Tok::Semi, std::string("after the ") + what);
        return out;
    }

    void parse_domain(BTDocument& doc) {
        const Token& open = peek();
        next();
        expect(Tok::LBrace, "after 'domain'");
        bt::plan::PlanningProblem problem;
        std::vector<bt::plan::Fluent> init, goal;
        std::vector<bt::plan::ScriptedEvent> events;
        bool saw_init = false, saw_goal = false;
        while (peek().kind != Tok::RBrace) {
            const Token& t = peek();
            std::string w = expect_word("inside the domain section");
            if (w == "constants") {
                while (peek().kind == Tok::Word) problem.domain.constants.push_back(next().text);
                expect(Tok::Semi, "after the constants");
            } else if (w == "action") {
                problem.domain.templates.push_back(parse_template());
            } else if (w == "init") {
                if (saw_init) syntax_error(t.line, t.col, "duplicate init entry");
                saw_init = true;
                init = parse_signed_atom_list("init facts");
                for (const auto& f : init)
                    if (f.negated)
                        syntax_error(t.line, t.col, "init facts are positive atoms");
            } else if (w == "goal") {
                if (saw_goal) syntax_error(t.line, t.col, "duplicate goal entry");
                saw_goal = true;
                goal = parse_signed_atom_list("goal");
            } else if (w == "perturb") {
                bt::plan::ScriptedEvent ev;
                ev.tick = integer("as the perturbation tick");
                expect(Tok::Colon, "after the tick");
                ev.effects = parse_signed_atom_list("perturbation");
                events.push_back(std::move(ev));
            } else {
                syntax_error(t.line, t.col, "unknown domain entry '" + w + "'");
            }
        }
        expect(Tok::RBrace, "to close the domain");
        if (!saw_goal)
            syntax_error(open.line, open.col, "the domain section needs a goal");

        // Resolve names: template arguments are either the template's own
        // parameters (stored with the variable marker) or declared constants.
        std::set<std::string> constants(problem.domain.constants.begin(),
                                        problem.domain.constants.end());
        auto check_ground = [&](const bt::plan::Fluent& f, const std::string& where) {
            for (const auto& a : f.args)
                if (!constants.count(a))
                    throw Error(Errc::UnresolvedReference,
                                "unknown constant '" + a + "' in " + where);
        };
        for (auto& tmpl : problem.domain.templates) {
            std::set<std::string> params(tmpl.params.begin(), tmpl.params.end());
            auto fix = [&](bt::plan::Fluent& f) {
                for (auto& a : f.args) {
                    if (params.count(a)) a = "?" + a;
                    else if (!constants.count(a))
                        throw Error(Errc::UnresolvedReference, "unknown constant '" + a +
                                                                   "' in template '" + tmpl.name +
                                                                   "'");
                }
            };
            for (auto& disjunction : tmpl.con)
                for (auto& f : disjunction) fix(f);
            for (auto& f : tmpl.eff) fix(f);
            for (auto& p : tmpl.params) p = "?" + p;
        }
        for (const auto& f : init) check_ground(f, "the init facts");
        for (const auto& f : goal) check_ground(f, "the goal");
        for (const auto& ev : events)
            for (const auto& f : ev.effects) check_ground(f, "a perturbation");

        problem.init = bt::plan::WorldState::from(init);
        problem.goal = std::move(goal);
        doc.problem = std::move(problem);
        doc.events = std::move(events);
    }

    bt::plan::ActionTemplate parse_template() {
        bt::plan::ActionTemplate tmpl;
        tmpl.name = expect_word("as the action name");
        if (peek().kind == Tok::LParen) {
            next();
            while (true) {
                tmpl.params.push_back(expect_word("as a parameter"));
                if (peek().kind == Tok::Comma) {
                    next();
                    continue;
                }
                break;
            }
            expect(Tok::RParen, "to close the parameter list");
        }
        expect(Tok::LBrace, "to open the action body");
        bool saw_pre = false, saw_eff = false, saw_duration = false;
        while (peek().kind != Tok::RBrace) {
            const Token& t = peek();
            std::string w = expect_word("inside the action body");
            if (w == "pre") {
                if (saw_pre) syntax_error(t.line, t.col, "duplicate pre entry");
                saw_pre = true;
                while (true) {
                    std::vector<bt::plan::Fluent> disjunction;
                    disjunction.push_back(parse_signed_atom());
                    while (peek().kind == Tok::Pipe) {
                        next();
                        disjunction.push_back(parse_signed_atom());
                    }
                    tmpl.con.push_back(std::move(disjunction));
                    if (peek().kind == Tok::Comma) {
                        next();
                        continue;
                    }
                    break;
                }
                expect(Tok::Semi, "after the preconditions");
            } else if (w == "eff") {
                if (saw_eff) syntax_error(t.line, t.col, "duplicate eff entry");
                saw_eff = true;
                tmpl.eff = parse_signed_atom_list("effects");
            } else if (w == "duration") {
                if (saw_duration) syntax_error(t.line, t.col, "duplicate duration entry");
                saw_duration = true;
                tmpl.duration = static_cast<int>(integer("as the duration"));
                expect(Tok::Semi, "after the duration");
            } else {
                syntax_error(t.line, t.col, "unknown action entry '" + w + "'");
            }
        }
        expect(Tok::RBrace, "to close the action body");
        return tmpl;
    }

    // -- converter sources ---------------------------------------------------

    bt::conv::DecisionTree parse_dt() {
        const Token& t = peek();
        std::string w = expect_word("as a decision ('if' or 'do')");
        if (w == "do") {
            std::string act = expect_word("as the action");
            leaf_terminator();
            return bt::conv::dt_leaf(act);
        }
        if (w != "if") syntax_error(t.line, t.col, "expected 'if' or 'do', found '" + w + "'");
        std::string predicate = expect_word("as the predicate");
        expect(Tok::LBrace, "to open the yes branch");
        bt::conv::DecisionTree yes = parse_dt();
        expect(Tok::RBrace, "to close the yes branch");
        const Token& e = peek();
        if (expect_word("after the yes branch") != "else")
            syntax_error(e.line, e.col, "expected 'else'");
        expect(Tok::LBrace, "to open the no branch");
        bt::conv::DecisionTree no = parse_dt();
        expect(Tok::RBrace, "to close the no branch");
        return bt::conv::dt_node(predicate, std::move(yes), std::move(no));
    }

    void parse_subsumption(BTDocument& doc) {
        next();
        expect(Tok::LBrace, "after 'subsumption'");
        bt::conv::SubsumptionStack stack;
        while (peek().kind != Tok::RBrace) {
            const Token& t = peek();
            if (expect_word("inside the subsumption section") != "controller")
                syntax_error(t.line, t.col, "expected 'controller'");
            bt::conv::SubController c;
            c.name = expect_word("as the controller name");
            const Token& k = peek();
            if (expect_word("after the controller name") != "wants")
                syntax_error(k.line, k.col, "expected 'wants'");
            c.wants_key = expect_word("as the activation flag");
            expect(Tok::Semi, "after the controller");
            stack.controllers.push_back(std::move(c));
        }
        expect(Tok::RBrace, "to close the subsumption section");
        doc.stack = std::move(stack);
    }

    void parse_tr(BTDocument& doc) {
        next();
        expect(Tok::LBrace, "after 'teleo_reactive'");
        bt::conv::TRProgram program;
        while (peek().kind != Tok::RBrace) {
            bt::conv::TRRule rule;
            std::string cond = expect_word("as the rule condition");
            rule.condition = (cond == "else") ? "" : cond;
            expect(Tok::Arrow, "after the condition");
            rule.action = expect_word("as the rule action");
            expect(Tok::Semi, "after the rule");
            program.rules.push_back(std::move(rule));
        }
        expect(Tok::RBrace, "to close the teleo_reactive section");
        doc.tr = std::move(program);
    }

    void parse_fsm(BTDocument& doc) {
        next();
        expect(Tok::LBrace, "after 'fsm'");
        bt::conv::FSMSpec spec;
        while (peek().kind != Tok::RBrace) {
            const Token& t = peek();
            std::string w = expect_word("inside the fsm section");
            if (w == "initial") {
                spec.initial = expect_word("as the initial state");
                expect(Tok::Semi, "after the initial state");
            } else if (w == "state_key") {
                spec.state_key = expect_word("as the state key");
                expect(Tok::Semi, "after the state key");
            } else if (w == "event_key") {
                spec.event_key = expect_word("as the event key");
                expect(Tok::Semi, "after the event key");
            } else if (w == "state") {
                bt::conv::FSMState state;
                state.name = expect_word("as the state name");
                const Token& d = peek();
                if (expect_word("after the state name") != "do")
                    syntax_error(d.line, d.col, "expected 'do'");
                state.action = expect_word("as the state action");
                expect(Tok::LBrace, "to open the transitions");
                while (peek().kind != Tok::RBrace) {
                    bt::conv::FSMTransition tr;
                    if (peek().kind == Tok::Arrow) {
                        next();  // unconditional
                    } else {
                        const Token& o = peek();
                        if (expect_word("as a transition") != "on")
                            syntax_error(o.line, o.col, "expected 'on' or '->'");
                        tr.event = expect_word("as the event");
                        expect(Tok::Arrow, "after the event");
                    }
                    tr.to = expect_word("as the target state");
                    expect(Tok::Semi, "after the transition");
                    state.transitions.push_back(std::move(tr));
                }
                expect(Tok::RBrace, "to close the transitions");
                spec.states.push_back(std::move(state));
            } else {
                syntax_error(t.line, t.col, "unknown fsm entry '" + w + "'");
            }
        }
        expect(Tok::RBrace, "to close the fsm section");
        doc.fsm = std::move(spec);
    }

    // -- metadata ------------------------------------------------------------

    void parse_unit(BTDocument& doc) {
        next();
        const Token& t = peek();
        if (t.kind != Tok::Word && t.kind != Tok::Str)
            syntax_error(t.line, t.col, "expected the time unit after 'unit'");
        doc.unit = next().text;
        expect(Tok::Semi, "after the unit");
    }

    void parse_seed(BTDocument& doc) {
        next();
        const Token& t = expect(Tok::Number, "after 'seed'");
        if (t.text.find_first_not_of("0123456789") != std::string::npos)
            syntax_error(t.line, t.col, "the seed must be a non-negative integer");
        doc.seed = std::strtoull(t.text.c_str(), nullptr, 10);
        expect(Tok::Semi, "after the seed");
    }

    // -- document-level checks ----------------------------------------------

    void finalize(BTDocument& doc) {
        if (doc.root) {
            long counter = 0;
            std::function<void(BTNode&)> assign = [&](BTNode& n) {
                n.id = "n" + std::to_string(++counter);
                if (is_leaf(n.kind) && n.ref.empty()) n.ref = n.id;
                for (auto& c : n.children) assign(*c);
            };
            assign(*doc.root);

            visit(*doc.root, [](const BTNode& n) {
                if (n.kind == NodeKind::Parallel &&
                    n.parallel_m > static_cast<int>(n.children.size()))
                    throw Error(Errc::UnresolvedReference,
                                "parallel threshold " + std::to_string(n.parallel_m) +
                                    " exceeds the child count " +
                                    std::to_string(n.children.size()) + " (node " + n.id + ")");
            });

            auto violations = validate(*doc.root);
            if (!violations.empty())
                throw Error(Errc::MalformedTree,
                            violations.front().node_id + ": " + violations.front().rule);
        }

        // Binding resolution: sections may only bind leaves that exist, and
        // no leaf may be bound by more than one section.
        std::set<std::string> leaf_refs;
        if (doc.root)
            visit(*doc.root, [&](const BTNode& n) {
                if (is_leaf(n.kind)) leaf_refs.insert(n.ref.empty() ? n.id : n.ref);
            });
        auto check_known = [&](const std::string& key, const char* section) {
            if (!doc.root)
                throw Error(Errc::UnresolvedReference,
                            std::string(section) + " entry '" + key +
                                "' without a tree to bind it to");
            if (!leaf_refs.count(key))
                throw Error(Errc::UnresolvedReference, std::string(section) + " entry '" + key +
                                                           "' does not name a tree leaf");
        };
        for (const auto& [key, profile] : doc.profiles) check_known(key, "profiles");
        for (const auto& [key, script] : doc.scripts) {
            check_known(key, "scripts");
            if (doc.profiles.count(key))
                throw Error(Errc::UnresolvedReference,
                            "leaf '" + key + "' is bound by both a profile and a script");
        }

        if (doc.system) {
            auto known = bt::ss::models::system_names();
            if (*doc.system != kBatteryRobotSystem &&
                std::find(known.begin(), known.end(), *doc.system) == known.end())
                throw Error(Errc::UnresolvedReference,
                            "unknown state-space system '" + *doc.system + "'");
        }

        if (doc.fsm) {
            // Surface structural problems (unknown targets, ambiguous
            // transitions) at parse time; the conversion itself is redone on
            // demand.
            (void)bt::conv::fsm_to_bt(*doc.fsm);
        }
    }
};

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

void serialize_node(const BTNode& node, int depth, std::string& out) {
    std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    switch (node.kind) {
        case NodeKind::Action:
        case NodeKind::Condition:
            out += pad + (node.kind == NodeKind::Action ? "action " : "condition ") + node.ref +
                   ";\n";
            return;
        case NodeKind::Fallback: out += pad + "fallback {\n"; break;
        case NodeKind::FallbackMemory: out += pad + "fallback* {\n"; break;
        case NodeKind::Sequence: out += pad + "sequence {\n"; break;
        case NodeKind::SequenceMemory: out += pad + "sequence* {\n"; break;
        case NodeKind::Parallel:
            out += pad + "parallel(" + std::to_string(node.parallel_m) + ") {\n";
            break;
        case NodeKind::Decorator: {
            std::string policy;
            switch (node.policy.kind) {
                case DecoratorPolicy::Kind::Invert: policy = "invert"; break;
                case DecoratorPolicy::Kind::MaxNTries:
                    policy = "max_tries:" + std::to_string(node.policy.max_tries);
                    break;
                case DecoratorPolicy::Kind::MaxTSeconds:
                    policy = "max_seconds:" + format_double(node.policy.max_seconds);
                    break;
                case DecoratorPolicy::Kind::Custom: policy = "rule:" + node.policy.rule; break;
            }
            out += pad + "decorator(" + policy + ") {\n";
            break;
        }
    }
    for (const auto& c : node.children) serialize_node(*c, depth + 1, out);
    out += pad + "}\n";
}

void serialize_dt(const bt::conv::DecisionTree& dt, int depth, std::string& out) {
    std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
    if (dt.is_leaf()) {
        out += pad + "do " + dt.label + ";\n";
        return;
    }
    out += pad + "if " + dt.label + " {\n";
    serialize_dt(*dt.yes, depth + 1, out);
    out += pad + "} else {\n";
    serialize_dt(*dt.no, depth + 1, out);
    out += pad + "}\n";
}

std::string serialize_profile(const bt::rel::ActionProfile& p) {
    auto val = [](const std::optional<double>& v) { return format_double(v.value_or(0.0)); };
    switch (p.kind) {
        case bt::rel::ProfileKind::Stochastic:
            return "stochastic p_s " + format_double(p.p_s) + " mu " + val(p.mu) + " nu " +
                   val(p.nu);
        case bt::rel::ProfileKind::Deterministic:
            return "deterministic p_s " + format_double(p.p_s) + " tau_s " + val(p.tau_s) +
                   " tau_f " + val(p.tau_f);
        case bt::rel::ProfileKind::HybridFixedSuccess:
            return "hybrid_fixed_success p_s " + format_double(p.p_s) + " tau_s " + val(p.tau_s) +
                   " nu " + val(p.nu);
        case bt::rel::ProfileKind::HybridFixedFailure:
            return "hybrid_fixed_failure p_s " + format_double(p.p_s) + " mu " + val(p.mu) +
                   " tau_f " + val(p.tau_f);
        case bt::rel::ProfileKind::Condition:
            return "condition p_s " + format_double(p.p_s);
    }
    return "";
}

}  // namespace

std::string serialize(const BTDocument& doc) {
    std::vector<std::string> sections;

    std::string meta;
    if (!doc.unit.empty())
        meta += "unit " + (is_word(doc.unit) ? doc.unit : "\"" + doc.unit + "\"") + ";\n";
    if (doc.seed) meta += "seed " + std::to_string(*doc.seed) + ";\n";
    if (!meta.empty()) sections.push_back(meta);

    if (doc.root) {
        std::string s = "tree " + doc.tree_name + " {\n";
        serialize_node(*doc.root, 1, s);
        s += "}\n";
        sections.push_back(s);
    }

    if (!doc.profiles.empty()) {
        std::string s = "profiles {\n";
        for (const auto& [key, profile] : doc.profiles)
            s += "  " + key + ": " + serialize_profile(profile) + ";\n";
        s += "}\n";
        sections.push_back(s);
    }

    if (!doc.scripts.empty()) {
        std::string s = "scripts {\n";
        for (const auto& [key, statuses] : doc.scripts) {
            s += "  " + key + ":";
            for (Status st : statuses)
                s += (st == Status::Success) ? " S" : (st == Status::Failure) ? " F" : " R";
            s += ";\n";
        }
        s += "}\n";
        sections.push_back(s);
    }

    if (doc.system) {
        std::string s = "statespace {\n  system " + *doc.system + ";\n";
        if (doc.grid) s += "  grid " + std::to_string(*doc.grid) + ";\n";
        s += "}\n";
        sections.push_back(s);
    }

    if (doc.problem) {
        const auto& p = *doc.problem;
        std::string s = "domain {\n";
        if (!p.domain.constants.empty()) {
            s += "  constants";
            for (const auto& c : p.domain.constants) s += " " + c;
            s += ";\n";
        }
        for (const auto& tmpl : p.domain.templates) {
            s += "  action " + tmpl.name;
            if (!tmpl.params.empty()) {
                s += "(";
                for (std::size_t i = 0; i < tmpl.params.size(); ++i) {
                    if (i) s += ", ";
                    s += strip_var(tmpl.params[i]);
                }
                s += ")";
            }
            s += " {\n";
            if (!tmpl.con.empty()) {
                s += "    pre ";
                for (std::size_t i = 0; i < tmpl.con.size(); ++i) {
                    if (i) s += ", ";
                    for (std::size_t j = 0; j < tmpl.con[i].size(); ++j) {
                        if (j) s += " | ";
                        s += signed_atom_text(tmpl.con[i][j]);
                    }
                }
                s += ";\n";
            }
            if (!tmpl.eff.empty()) {
                s += "    eff ";
                for (std::size_t i = 0; i < tmpl.eff.size(); ++i) {
                    if (i) s += ", ";
                    s += signed_atom_text(tmpl.eff[i]);
                }
                s += ";\n";
            }
            s += "    duration " + std::to_string(tmpl.duration) + ";\n";
            s += "  }\n";
        }
        if (!p.init.facts().empty()) {
            s += "  init ";
            std::size_t i = 0;
            for (const auto& fact : p.init.facts()) {
                if (i++) s += ", ";
                s += fact;
            }
            s += ";\n";
        }
        s += "  goal ";
        for (std::size_t i = 0; i < p.goal.size(); ++i) {
            if (i) s += ", ";
            s += signed_atom_text(p.goal[i]);
        }
        s += ";\n";
        for (const auto& ev : doc.events) {
            s += "  perturb " + std::to_string(ev.tick) + ": ";
            for (std::size_t i = 0; i < ev.effects.size(); ++i) {
                if (i) s += ", ";
                s += signed_atom_text(ev.effects[i]);
            }
            s += ";\n";
        }
        s += "}\n";
        sections.push_back(s);
    }

    if (doc.dtree) {
        std::string s = "decision_tree {\n";
        serialize_dt(*doc.dtree, 1, s);
        s += "}\n";
        sections.push_back(s);
    }

    if (doc.stack) {
        std::string s = "subsumption {\n";
        for (const auto& c : doc.stack->controllers)
            s += "  controller " + c.name + " wants " + c.wants_key + ";\n";
        s += "}\n";
        sections.push_back(s);
    }

    if (doc.tr) {
        std::string s = "teleo_reactive {\n";
        for (const auto& rule : doc.tr->rules)
            s += "  " + (rule.condition.empty() ? std::string("else") : rule.condition) + " -> " +
                 rule.action + ";\n";
        s += "}\n";
        sections.push_back(s);
    }

    if (doc.fsm) {
        const auto& m = *doc.fsm;
        std::string s = "fsm {\n  initial " + m.initial + ";\n";
        if (m.state_key != "state") s += "  state_key " + m.state_key + ";\n";
        if (m.event_key != "event") s += "  event_key " + m.event_key + ";\n";
        for (const auto& state : m.states) {
            s += "  state " + state.name + " do " + state.action + " {\n";
            for (const auto& tr : state.transitions) {
                s += "    ";
                if (!tr.event.empty()) s += "on " + tr.event + " ";
                s += "-> " + tr.to + ";\n";
            }
            s += "  }\n";
        }
        s += "}\n";
        sections.push_back(s);
    }

    std::string out;
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (i) out += "\n";
        out += sections[i];
    }
    return out;
}

BTDocument parse(const std::string& input) {
    Parser parser(input);
    return parser.parse_document();
}

// ---------------------------------------------------------------------------
// DOT export
// ---------------------------------------------------------------------------

namespace {

std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

std::string dot_label(const BTNode& n) {
    switch (n.kind) {
        case NodeKind::Fallback: return "?";
        case NodeKind::FallbackMemory: return "?*";
        case NodeKind::Sequence: return "→";
        case NodeKind::SequenceMemory: return "→*";
        case NodeKind::Parallel: return "⇉ M=" + std::to_string(n.parallel_m);
        case NodeKind::Decorator:
            switch (n.policy.kind) {
                case DecoratorPolicy::Kind::Invert: return "invert";
                case DecoratorPolicy::Kind::MaxNTries:
                    return "max_tries=" + std::to_string(n.policy.max_tries);
                case DecoratorPolicy::Kind::MaxTSeconds:
                    return "max_seconds=" + format_double(n.policy.max_seconds);
                case DecoratorPolicy::Kind::Custom: return n.policy.rule;
            }
            return "decorator";
        case NodeKind::Action:
        case NodeKind::Condition: return n.ref.empty() ? n.id : n.ref;
    }
    return "?";
}

const char* dot_shape(NodeKind k) {
    switch (k) {
        case NodeKind::Action: return "box";
        case NodeKind::Condition: return "ellipse";
        case NodeKind::Decorator: return "diamond";
        default: return "square";
    }
}

}  // namespace

std::string export_dot(const BTNode& root) {
    std::string nodes_out, edges_out;
    std::function<void(const BTNode&)> walk = [&](const BTNode& n) {
        nodes_out += "  \"" + dot_escape(n.id) + "\" [shape=" + dot_shape(n.kind) + ", label=\"" +
                     dot_escape(dot_label(n)) + "\"];\n";
        for (const auto& c : n.children) {
            edges_out += "  \"" + dot_escape(n.id) + "\" -> \"" + dot_escape(c->id) + "\";\n";
            walk(*c);
        }
    };
    walk(root);
    std::string out = "digraph bt {\n  rankdir=TB;\n  ordering=out;\n";
    out += nodes_out;
    out += edges_out;
    out += "}\n";
    return out;
}

// ---------------------------------------------------------------------------
// run command
// ---------------------------------------------------------------------------

namespace {

/// Sampled execution state of one profiled leaf driver.
struct SampleSlot {
    bool pending = false;
    Status outcome = Status::Failure;
    long remaining = 0;
};

double draw_duration(const bt::rel::ActionProfile& p, Status outcome, bt::rel::SplitMix64& rng) {
    using bt::rel::ProfileKind;
    const bool success = outcome == Status::Success;
    switch (p.kind) {
        case ProfileKind::Stochastic:
            return rng.exponential(success ? p.mu.value_or(1.0) : p.nu.value_or(1.0));
        case ProfileKind::Deterministic:
            return success ? p.tau_s.value_or(0.0) : p.tau_f.value_or(0.0);
        case ProfileKind::HybridFixedSuccess:
            return success ? p.tau_s.value_or(0.0) : rng.exponential(p.nu.value_or(1.0));
        case ProfileKind::HybridFixedFailure:
            return success ? rng.exponential(p.mu.value_or(1.0)) : p.tau_f.value_or(0.0);
        case ProfileKind::Condition: return 0.0;
    }
    return 0.0;
}

}  // namespace

RunResult run_document(const BTDocument& doc, const RunOptions& options) {
    if (!doc.root) throw Error(Errc::MissingSection, "the document has no tree to run");

    std::set<std::string> refs, instant;
    visit(*doc.root, [&](const BTNode& n) {
        if (!is_leaf(n.kind)) return;
        const std::string ref = n.ref.empty() ? n.id : n.ref;
        refs.insert(ref);
        if (n.kind == NodeKind::Condition) instant.insert(ref);
    });

    ExecutionContext ctx;
    double now = 0.0;
    ctx.clock = [&now] { return now; };

    const std::uint64_t seed = options.seed ? *options.seed : doc.seed.value_or(0);
    auto rng = std::make_shared<bt::rel::SplitMix64>(seed);

    for (const auto& ref : refs) {
        if (auto it = doc.scripts.find(ref); it != doc.scripts.end()) {
            ctx.bind_script(ref, it->second);
            continue;
        }
        auto it = doc.profiles.find(ref);
        if (it == doc.profiles.end())
            throw Error(Errc::UnresolvedReference,
                        "leaf '" + ref + "' is not bound by any section");
        const bt::rel::ActionProfile profile = it->second;
        const bool resolve_now = instant.count(ref) > 0;
        auto slot = std::make_shared<SampleSlot>();
        LeafDriver driver;
        driver.on_tick = [profile, resolve_now, slot, rng](ExecutionContext&) {
            if (resolve_now)
                return rng->uniform01() < profile.p_s ? Status::Success : Status::Failure;
            if (!slot->pending) {
                slot->outcome =
                    rng->uniform01() < profile.p_s ? Status::Success : Status::Failure;
                double d = draw_duration(profile, slot->outcome, *rng);
                slot->remaining = std::max(1L, static_cast<long>(std::ceil(d)));
                slot->pending = true;
            }
            if (slot->remaining <= 1) {
                slot->pending = false;
                return slot->outcome;
            }
            --slot->remaining;
            return Status::Running;
        };
        driver.on_halt = [slot](ExecutionContext&) { slot->pending = false; };
        ctx.bind(ref, std::move(driver));
    }

    RunResult result;
    for (long t = 1; t <= options.max_ticks; ++t) {
        Status status = tick(*doc.root, ctx);
        nlohmann::json leaves = nlohmann::json::array();
        for (const auto& ev : ctx.last_tick_events())
            leaves.push_back({{"id", ev.node_id}, {"ref", ev.ref}, {"status", to_string(ev.status)}});
        result.trace.push_back(
            {{"tick", t}, {"status", to_string(status)}, {"leaves", std::move(leaves)}});
        result.ticks = t;
        result.status = status;
        now += 1.0;
        if (status != Status::Running) return result;
    }
    result.exhausted = true;
    return result;
}

int exit_code(const RunResult& result) {
    if (result.exhausted) return 2;
    return result.status == Status::Success ? 0 : 1;
}

int exit_code(const bt::plan::PlanOutcome outcome) {
    switch (outcome) {
        case bt::plan::PlanOutcome::Success: return 0;
        case bt::plan::PlanOutcome::CannotExpand: return 1;
        case bt::plan::PlanOutcome::BudgetExhausted: return 2;
    }
    return 2;
}

// ---------------------------------------------------------------------------
// analyze command
// ---------------------------------------------------------------------------

namespace {

nlohmann::json witness_list(const std::vector<bt::ss::Vec>& witnesses, std::size_t cap = 5) {
    nlohmann::json out = nlohmann::json::array();
    for (std::size_t i = 0; i < witnesses.size() && i < cap; ++i)
        out.push_back(witnesses[i]);
    return out;
}

nlohmann::json analyze_reliability(const BTDocument& doc, const AnalyzeOptions& options) {
    if (!doc.root)
        throw Error(Errc::MissingSection, "reliability analysis needs a tree section");
    if (doc.profiles.empty())
        throw Error(Errc::MissingSection, "reliability analysis needs a profiles section");
    visit(*doc.root, [&](const BTNode& n) {
        if (!is_leaf(n.kind)) return;
        const std::string ref = n.ref.empty() ? n.id : n.ref;
        if (!doc.profiles.count(ref))
            throw Error(Errc::UnresolvedReference, "leaf '" + ref + "' has no profile");
    });

    std::vector<double> grid;
    if (options.horizon > 0.0) {
        int samples = options.grid > 0 ? options.grid : doc.grid.value_or(20);
        for (int i = 0; i <= samples; ++i)
            grid.push_back(options.horizon * i / samples);
    }

    bt::rel::ReliabilityReport report = bt::rel::analyze(*doc.root, doc.profiles, grid);
    nlohmann::json j{{"format_version", kFormatVersion},
                     {"mode", "reliability"},
                     {"unit", doc.unit},
                     {"ps_inf", report.ps_inf},
                     {"pf_inf", report.pf_inf},
                     {"mtts", opt_num(report.mtts)},
                     {"mttf", opt_num(report.mttf)},
                     {"mu", opt_num(report.mu)},
                     {"nu", opt_num(report.nu)},
                     {"notes", report.notes}};
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : report.grid)
        samples.push_back(
            {{"t", s.t}, {"ps", s.p_success}, {"pf", s.p_failure}, {"prun", s.p_running}});
    j["grid"] = std::move(samples);

    if (options.runs > 0) {
        const std::uint64_t seed = options.seed ? *options.seed : doc.seed.value_or(0);
        bt::rel::MonteCarloReport mc =
            bt::rel::monte_carlo(*doc.root, doc.profiles, options.runs, seed, grid);
        j["monte_carlo"] = {{"runs", mc.runs},
                            {"seed", mc.seed},
                            {"ps_hat", mc.ps_hat},
                            {"pf_hat", mc.pf_hat},
                            {"mtts_hat", opt_num(mc.mtts_hat)},
                            {"mttf_hat", opt_num(mc.mttf_hat)},
                            {"mu_hat", opt_num(mc.mu_hat)},
                            {"nu_hat", opt_num(mc.nu_hat)},
                            {"rng_algorithm", mc.rng_algorithm}};
    }
    return j;
}

nlohmann::json analyze_statespace(const BTDocument& doc, const AnalyzeOptions& options) {
    namespace ss = bt::ss;
    namespace models = bt::ss::models;
    if (!doc.system)
        throw Error(Errc::MissingSection, "state-space analysis needs a statespace section");
    const std::string& name = *doc.system;
    const int per_dim = options.grid > 0 ? options.grid : doc.grid.value_or(50);

    if (name == kBatteryRobotSystem) {
        models::NamedSystem charge = models::guarantee_power();
        models::NamedSystem task = models::do_other_task();
        ss::SampledDomain domain = models::battery_domain(per_dim);
        ss::SafetyReport report =
            ss::check_safety(charge.bt, charge.spec, task.bt, models::battery_obstacle(),
                             models::battery_invariant(), models::kBatteryMargin, domain, 10000);
        return nlohmann::json{{"format_version", kFormatVersion},
                              {"mode", "statespace"},
                              {"kind", "safety"},
                              {"system", name},
                              {"grid", per_dim},
                              {"starts_checked", domain.points.size()},
                              {"safe", report.safe},
                              {"margin_ok", report.margin_ok},
                              {"trajectories_ok", report.trajectories_ok},
                              {"max_step", report.max_step},
                              {"margin_witnesses", witness_list(report.margin_witnesses)},
                              {"trajectory_witnesses", witness_list(report.trajectory_witnesses)},
                              {"notes", report.notes}};
    }

    std::optional<models::NamedSystem> system = models::find_system(name);
    if (!system)
        throw Error(Errc::UnresolvedReference, "unknown state-space system '" + name + "'");
    const bool battery = name == "guarantee_power" || name == "do_other_task";
    ss::SampledDomain domain =
        battery ? models::battery_domain(per_dim) : models::humanoid_domain(per_dim);
    ss::FtsReport fts = ss::check_fts(system->bt, system->spec, domain);
    std::size_t partition_violations = ss::check_partition(system->spec, domain).size();
    return nlohmann::json{{"format_version", kFormatVersion},
                          {"mode", "statespace"},
                          {"kind", "fts"},
                          {"system", name},
                          {"grid", per_dim},
                          {"starts_checked", fts.starts_checked},
                          {"is_fts", fts.is_fts},
                          {"worst_tau", fts.worst_tau},
                          {"declared_tau", opt_num(system->spec.tau)},
                          {"partition_violations", partition_violations},
                          {"witnesses", witness_list(fts.witnesses)}};
}

}  // namespace

nlohmann::json analyze_document(const BTDocument& doc, const AnalyzeOptions& options) {
    std::string what = options.what;
    if (what.empty()) {
        const bool reliability = !doc.profiles.empty();
        const bool statespace = doc.system.has_value();
        if (reliability && statespace)
            throw Error(Errc::MissingSection,
                        "both profiles and statespace sections present; pass the mode to analyze");
        if (reliability) what = "reliability";
        else if (statespace) what = "statespace";
        else
            throw Error(Errc::MissingSection,
                        "the document has no analyzable section (profiles or statespace)");
    }
    if (what == "reliability") return analyze_reliability(doc, options);
    if (what == "statespace") return analyze_statespace(doc, options);
    throw Error(Errc::MissingSection,
                "unknown analysis '" + what + "' (expected reliability or statespace)");
}

// ---------------------------------------------------------------------------
// plan command
// ---------------------------------------------------------------------------

nlohmann::json plan_document(const BTDocument& doc, long max_iterations) {
    if (!doc.problem)
        throw Error(Errc::MissingSection, "planning needs a domain section");
    bt::plan::PlanResult result = bt::plan::pabt_run(doc.problem->domain, doc.problem->init,
                                                     doc.problem->goal, max_iterations, doc.events);

    nlohmann::json events = nlohmann::json::array();
    nlohmann::json expanded = nlohmann::json::array();
    using Kind = bt::plan::TraceEvent::Kind;
    for (const auto& ev : result.trace.events) {
        if (ev.kind == Kind::Tick) continue;
        const char* kind = "";
        switch (ev.kind) {
            case Kind::Expansion: kind = "expansion"; break;
            case Kind::Conflict: kind = "conflict"; break;
            case Kind::Promotion: kind = "promotion"; break;
            case Kind::Refinement: kind = "refinement"; break;
            case Kind::Perturbation: kind = "perturbation"; break;
            case Kind::Tick: break;
        }
        events.push_back({{"kind", kind}, {"tick", ev.tick}, {"detail", ev.detail}});
        if (ev.kind == Kind::Expansion) expanded.push_back(ev.detail);
    }
    return nlohmann::json{{"format_version", kFormatVersion},
                          {"mode", "plan"},
                          {"outcome", bt::plan::to_string(result.outcome)},
                          {"detail", result.detail},
                          {"ticks", result.trace.ticks},
                          {"expansions", result.trace.expansions},
                          {"conflicts", result.trace.conflicts},
                          {"promotions", result.trace.promotions},
                          {"refinements", result.trace.refinements},
                          {"executed_actions", result.trace.executed_actions},
                          {"expanded", std::move(expanded)},
                          {"events", std::move(events)}};
}

// ---------------------------------------------------------------------------
// convert command
// ---------------------------------------------------------------------------

nlohmann::json convert_document(const BTDocument& doc, const std::string& from) {
    std::string source = from;
    if (source.empty()) {
        std::vector<std::string> present;
        if (doc.dtree) present.push_back("decision_tree");
        if (doc.stack) present.push_back("subsumption");
        if (doc.tr) present.push_back("teleo_reactive");
        if (doc.fsm) present.push_back("fsm");
        if (present.empty())
            throw Error(Errc::MissingSection,
                        "the document has no convertible section (decision_tree, subsumption, "
                        "teleo_reactive, or fsm)");
        if (present.size() > 1)
            throw Error(Errc::MissingSection,
                        "multiple convertible sections present; pass the source to convert");
        source = present.front();
    }

    NodePtr tree;
    if (source == "decision_tree") {
        if (!doc.dtree)
            throw Error(Errc::MissingSection, "the document has no decision_tree section");
        tree = bt::conv::dt_to_bt(*doc.dtree);
    } else if (source == "subsumption") {
        if (!doc.stack)
            throw Error(Errc::MissingSection, "the document has no subsumption section");
        tree = bt::conv::subsumption_to_bt(*doc.stack);
    } else if (source == "teleo_reactive") {
        if (!doc.tr)
            throw Error(Errc::MissingSection, "the document has no teleo_reactive section");
        tree = bt::conv::tr_to_bt(*doc.tr);
    } else if (source == "fsm") {
        if (!doc.fsm) throw Error(Errc::MissingSection, "the document has no fsm section");
        tree = bt::conv::fsm_to_bt(*doc.fsm);
    } else {
        throw Error(Errc::MissingSection,
                    "unknown converter '" + source +
                        "' (expected decision_tree, subsumption, teleo_reactive, or fsm)");
    }

    BTDocument out;
    out.unit = doc.unit;
    out.tree_name = "converted";
    out.root = std::move(tree);
    return nlohmann::json{{"format_version", kFormatVersion},
                          {"mode", "convert"},
                          {"from", source},
                          {"document", serialize(out)},
                          {"dot", export_dot(*out.root)}};
}

}  // namespace bt::text
