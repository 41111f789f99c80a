// A tiny deterministic text adventure used by the tests and as a demo
// opponent for `jabber play`. No randomness and no timing dependence,
// so agent runs against it can be compared byte for byte.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

namespace {

struct Room {
  const char* name;
  const char* description;
  // exits[0..3] = north, south, east, west; -1 means no exit
  int exits[4];
};

const Room kRooms[] = {
    {"Tove Garden",
     "You stand in a garden of slithy toves. Brillig light gyres through the "
     "wabe. A borogove path leads north; a gimble arch opens east.",
     {1, -1, 2, -1}},
    {"Mimsy Hall",
     "A mimsy hall, all mome and rath. Something outgrabes in the rafters. "
     "The garden lies south.",
     {-1, 0, -1, -1}},
    {"Frumious Cellar",
     "A frumious cellar. A vorpal key glints on a tum-tum stump. The arch "
     "back west returns to the garden.",
     {-1, -1, -1, 0}},
};

std::string lower(std::string s) {
  for (char& c : s)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return s;
}

std::vector<std::string> words_of(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ' ' || c == '\t' || c == '\r') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

int dir_index(const std::string& w) {
  if (w == "north" || w == "n") return 0;
  if (w == "south" || w == "s") return 1;
  if (w == "east" || w == "e") return 2;
  if (w == "west" || w == "w") return 3;
  return -1;
}

}  // namespace

int main() {
  setvbuf(stdout, nullptr, _IONBF, 0);

  int room = 0;
  bool have_key = false;
  bool awaiting_direction = false;  // after a bare "go"

  auto travel = [&](int d) {
    const int next = kRooms[room].exits[d];
    if (next < 0) {
      printf("A tulgey wall blocks that way.\n> ");
    } else {
      room = next;
      printf("%s\n> ", kRooms[room].description);
    }
  };

  printf("GYRE AND GIMBLE v1: a pocket adventure.\n");
  printf("Verbs: look, go <direction>, take key, inventory, quit.\n\n%s\n> ",
         kRooms[room].description);

  char buf[1024];
  while (fgets(buf, sizeof buf, stdin)) {
    std::string line(buf);
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
      line.pop_back();
    const std::vector<std::string> w = words_of(lower(line));

    if (awaiting_direction) {
      awaiting_direction = false;
      const int d = w.empty() ? -1 : dir_index(w[0]);
      if (d < 0) {
        printf("That is no direction I know. Try north, south, east or west.\n> ");
        continue;
      }
      travel(d);
      continue;
    }

    if (w.empty()) {
      printf("Silence galumphs back at you.\n> ");
      continue;
    }

    const std::string& verb = w[0];
    if (verb == "quit" || verb == "q") {
      printf("You burble away. Callooh, callay.\n");
      return 0;
    }
    if (verb == "look" || verb == "l") {
      printf("%s\n> ", kRooms[room].description);
      continue;
    }
    if (verb == "inventory" || verb == "i") {
      if (have_key)
        printf("You carry the vorpal key.\n> ");
      else
        printf("Your pockets hold nothing but whiffling air.\n> ");
      continue;
    }
    if (verb == "go" || verb == "walk" || verb == "move") {
      if (w.size() < 2) {
        // Disambiguation question: the next line is read as the answer.
        awaiting_direction = true;
        printf("Which way?\n> ");
        continue;
      }
      const int d = dir_index(w[1]);
      if (d < 0) {
        printf("That is no direction I know. Try north, south, east or west.\n> ");
        continue;
      }
      travel(d);
      continue;
    }
    if (verb == "take" || verb == "get") {
      if (room == 2 && !have_key && w.size() >= 2 && w[1] == "key") {
        have_key = true;
        printf("You snicker-snack the vorpal key into your pocket.\n> ");
      } else {
        printf("There is nothing like that here to take.\n> ");
      }
      continue;
    }

    // Bare directions work the way every adventure player expects.
    const int bare = dir_index(verb);
    if (bare >= 0) {
      travel(bare);
      continue;
    }

    printf("That's not a dape I recognise.\n> ");
  }
  return 0;
}
