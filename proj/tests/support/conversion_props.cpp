#include "conversion_props.hpp"

#include <set>

namespace polyvm::testing::props {

namespace {

std::string describe(const Runtime& rt, const Value& v) { return rt.mop_display(v, rt.languages().front()); }

std::vector<std::pair<LangId, LangId>> pairs(const Runtime& rt) {
    std::vector<std::pair<LangId, LangId>> out;
    for (auto a : rt.languages()) {
        for (auto b : rt.languages()) {
            if (a != b) out.emplace_back(a, b);
        }
    }
    return out;
}

}  // namespace

Value random_plain(std::mt19937_64& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth > 0 ? 7 : 6);
    switch (pick(rng)) {
    case 0: return Value::nil();
    case 1: return Value::boolean(rng() & 1);
    case 2: return Value::integer(static_cast<std::int64_t>(rng()));
    case 3: {
        // beyond 64 bits
        BigInt big = static_cast<std::int64_t>(rng());
        big *= static_cast<std::int64_t>(rng() | 1);
        big *= static_cast<std::int64_t>(rng() | 1);
        return Value::integer(big);
    }
    case 4: {
        static const double specials[] = {0.0, -0.0, 1.5, -2.25, 1e300, 5e-324,
                                          std::numeric_limits<double>::infinity()};
        if (rng() % 3 == 0) return Value::real(specials[rng() % std::size(specials)]);
        return Value::real(std::uniform_real_distribution<double>(-1e9, 1e9)(rng));
    }
    case 5:
    case 6: {
        static const char* pieces[] = {"a", "Z", " ", "\n", "\"", "'", "\\", "é", "日本", "🙂", "it", "nil"};
        std::string s;
        for (auto n = rng() % 8; n > 0; --n) s += pieces[rng() % std::size(pieces)];
        return Value::text(s);
    }
    default: {
        List items;
        for (auto n = rng() % 5; n > 0; --n) items.push_back(random_plain(rng, depth - 1));
        return Value::list(std::move(items));
    }
    }
}

std::vector<Value> sample_objects(vm::Vm& machine) {
    std::vector<Value> out;
    auto grab = [&](const char* lang, const char* src) {
        auto pid = machine.spawn(lang, src);
        machine.run_until_settled(pid);
        const auto& p = machine.process(pid);
        if (p.result && !p.result->failed()) {
            for (const auto& v : *p.result->value.as_list()) out.push_back(v);
        }
    };
    grab("minipy",
         "class Point:\n"
         "    def __init__(self, x):\n"
         "        self.x = x\n"
         "def f():\n"
         "    return 1\n"
         "[Point(1), Point(2), f, Point]\n");
    grab("minirb",
         "class Box\n"
         "  def initialize(v)\n"
         "    @v = v\n"
         "  end\n"
         "end\n"
         "[Box.new(1), Box.new([1, 2]), Box]\n");
    return out;
}

Report round_trip(vm::Vm& machine, std::uint64_t seed, int samples) {
    auto& rt = machine.runtime();
    ConversionPolicy policy;
    std::mt19937_64 rng(seed);
    Report r;
    for (int i = 0; i < samples; ++i) {
        const auto v = random_plain(rng);
        for (auto [a, b] : pairs(rt)) {
            ++r.checked;
            const auto there = rt.convert(v, a, b, policy);
            if (there != v) r.failures.push_back("changed on the way out: " + describe(rt, v));
            if (rt.convert(there, b, a, policy) != v) r.failures.push_back("round trip: " + describe(rt, v));
        }
    }
    return r;
}

Report wrapping(vm::Vm& machine, std::uint64_t seed, int samples) {
    auto& rt = machine.runtime();
    const auto objects = sample_objects(machine);
    std::mt19937_64 rng(seed);
    Report r;
    if (objects.empty()) {
        r.failures.push_back("no sample objects");
        return r;
    }
    for (int i = 0; i < samples; ++i) {
        const auto& obj = objects[rng() % objects.size()];
        const auto owner = obj.as_object().lang;
        ConversionPolicy policy;
        policy.auto_convert = rng() & 1;
        policy.deep_lists = rng() & 1;
        for (auto other : rt.languages()) {
            if (other == owner) continue;
            ++r.checked;
            const auto foreign = rt.convert(obj, owner, other, policy);
            if (!foreign.is_foreign() || foreign.as_foreign().handle != obj.as_object().handle ||
                foreign.as_foreign().lang != owner) {
                r.failures.push_back("object did not cross as a reference to itself");
                continue;
            }
            // passing the reference on to any non-owner leaves it alone
            for (auto third : rt.languages()) {
                if (third == owner) continue;
                if (rt.convert(foreign, other, third, policy) != foreign) r.failures.push_back("double wrapping");
            }
            if (rt.convert(foreign, other, owner, policy) != obj) r.failures.push_back("unwrap at home");
            // and inside lists
            const auto list = Value::list({obj, Value::integer(1)});
            const auto crossed = rt.convert(list, owner, other, policy);
            if (policy.auto_convert && policy.deep_lists) {
                if (rt.convert(crossed, other, owner, policy) != list) r.failures.push_back("list round trip");
            }
        }
    }
    return r;
}

Report opt_out(vm::Vm& machine, std::uint64_t seed, int samples) {
    auto& rt = machine.runtime();
    const auto objects = sample_objects(machine);
    ConversionPolicy off;
    off.auto_convert = false;
    std::mt19937_64 rng(seed);
    Report r;
    std::set<std::pair<std::uint32_t, HeapHandle>> seen;
    for (int i = 0; i < samples; ++i) {
        const bool use_object = !objects.empty() && rng() % 4 == 0;
        for (auto [a, b] : pairs(rt)) {
            Value v = use_object ? objects[rng() % objects.size()] : random_plain(rng);
            if (v.is_object() && v.as_object().lang != a) continue;
            ++r.checked;
            const auto crossed = rt.convert(v, a, b, off);
            if (!crossed.is_foreign()) {
                r.failures.push_back("not wrapped: " + describe(rt, v));
                continue;
            }
            if (!v.is_object()) {
                // every plain value gets its own box
                auto key = std::pair{crossed.as_foreign().lang.index, crossed.as_foreign().handle};
                if (!seen.insert(key).second) r.failures.push_back("two inputs share a wrapper");
            }
            if (rt.convert(crossed, b, a, off) != v) r.failures.push_back("unwrap under opt-out: " + describe(rt, v));
        }
    }
    return r;
}

}  // namespace polyvm::testing::props
