#include "scenarios.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace polyvm::testing::scenarios {

std::string word_text() {
    // a short fixed passage repeated with variations until it reaches 200 words
    static const char* kLines[] = {
        "The Quick brown fox jumps over the lazy dog and the Dog sleeps",
        "A bird sings in the morning while the fox listens to the bird",
        "Every morning the Lazy dog waits for the quick fox near the river",
        "The river runs past the old mill and the mill stands still",
        "Children play by the river and the bird watches the children",
        "In the evening the fox returns and the dog barks at the fox",
        "The old mill keeps the grain and the grain feeds the village",
        "Nobody in the village remembers when the mill was built",
        "The bird and the fox and the dog share the quiet valley",
        "Morning comes again and the river carries the leaves away",
        "A quiet valley is a good home for a fox and a bird",
        "The village sleeps and the river runs on through the night",
        "Quick feet and quiet wings move along the river bank",
        "The End of the story is the start of a new morning",
        "When winter comes the valley turns white and the river freezes under the ice",
        "The fox and the bird wait for spring while the dog dreams of warm sun",
        "and the fox jumps once more",
    };
    std::string text;
    for (const auto* line : kLines) {
        if (!text.empty()) text += ' ';
        text += line;
    }
    return text;
}

namespace {

const char* kCountCell =
    "counts = []\n"
    "for w in it:\n"
    "    found = False\n"
    "    for pair in counts:\n"
    "        if pair[0] == w:\n"
    "            pair[1] = pair[1] + 1\n"
    "            found = True\n"
    "    if not found:\n"
    "        counts.append([w, 1])\n"
    "result = []\n"
    "for pair in counts:\n"
    "    placed = False\n"
    "    out = []\n"
    "    for r in result:\n"
    "        if not placed and (pair[1] > r[1] or (pair[1] == r[1] and pair[0] < r[0])):\n"
    "            out.append(pair)\n"
    "            placed = True\n"
    "        out.append(r)\n"
    "    if not placed:\n"
    "        out.append(pair)\n"
    "    result = out\n"
    "result\n";

std::string build_cell(const std::string& text) {
    // the first cell assembles the text from a few pieces
    std::istringstream words(text);
    std::vector<std::string> chunks(4);
    std::string w;
    std::size_t n = 0;
    while (words >> w) {
        auto& chunk = chunks[n++ * chunks.size() / 200 % chunks.size()];
        if (!chunk.empty()) chunk += ' ';
        chunk += w;
    }
    std::string src = "parts = []\n";
    for (const auto& c : chunks) src += "parts.append(\"" + c + "\")\n";
    src +=
        "summary = \"\"\n"
        "for p in parts:\n"
        "    if len(summary) > 0:\n"
        "        summary = summary + \" \"\n"
        "    summary = summary + p\n"
        "summary\n";
    return src;
}

}  // namespace

std::string word_frequency_split_cell() { return "it.downcase.split(\" \")\n"; }

std::vector<bridge::PipelineCell> word_frequency_cells(const std::string& text) {
    return {{"minipy", build_cell(text)}, {"minirb", word_frequency_split_cell()}, {"minipy", kCountCell}};
}

std::vector<bridge::PipelineCell> word_frequency_cells_broken(const std::string& text) {
    return {{"minipy", build_cell(text)},
            {"minirb", "scale = 10 / 0\nit.downcase.split(\" \")\n"},
            {"minipy", kCountCell}};
}

std::vector<std::pair<std::string, long>> word_frequency_oracle(const std::string& text) {
    std::map<std::string, long> counts;
    std::istringstream words(text);
    std::string w;
    while (words >> w) {
        std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
        ++counts[w];
    }
    std::vector<std::pair<std::string, long>> out(counts.begin(), counts.end());
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

}  // namespace polyvm::testing::scenarios
