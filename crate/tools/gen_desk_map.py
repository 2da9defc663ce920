#!/usr/bin/env python3
"""Generate assets/desk.map: a 198x209 occupancy grid with exactly
39720 occupied and 1662 free cells.

Layout: a through-corridor crossing a central high-security zone, a
perimeter detour (top corridor plus two vertical connectors), three
edge work rooms with doors, and a dead-end service hallway sized to
hit the free-cell total exactly.
"""

import os

WIDTH, HEIGHT = 198, 209
FREE_TARGET = 1662
OCCUPIED_TARGET = 39720

# the high-security zone; keep in sync with the daemon's default keep-out
# rectangle (x0, y0, x1, y1 inclusive)
ZONE = (88, 95, 109, 114)


def main() -> None:
    grid = [["#"] * WIDTH for _ in range(HEIGHT)]

    def carve(x0, y0, x1, y1):
        for y in range(y0, y1 + 1):
            for x in range(x0, x1 + 1):
                grid[y][x] = "."

    # central high-security zone (free until a keep-out toggle)
    carve(*ZONE)
    # through-corridor crossing the zone
    carve(10, 104, 187, 104)
    # perimeter detour: top corridor + two connectors
    carve(10, 5, 187, 5)
    carve(10, 6, 10, 103)
    carve(187, 6, 187, 103)
    # work room A (top-left) with its door
    carve(14, 8, 33, 17)
    carve(20, 6, 20, 7)
    # work room B (top-right) with its door
    carve(164, 8, 183, 17)
    carve(170, 6, 170, 7)
    # work room C (bottom-left) with its door
    carve(14, 108, 33, 117)
    carve(20, 105, 20, 107)
    # dead-end service hallway: the exact-count filler
    carve(150, 105, 150, 189)

    free = sum(row.count(".") for row in grid)
    occupied = WIDTH * HEIGHT - free
    assert free == FREE_TARGET, f"free={free}, want {FREE_TARGET}"
    assert occupied == OCCUPIED_TARGET, f"occupied={occupied}, want {OCCUPIED_TARGET}"

    out = os.path.join(os.path.dirname(__file__), "..", "assets", "desk.map")
    with open(out, "w") as f:
        f.write(f"{WIDTH} {HEIGHT}\n")
        for row in grid:
            f.write("".join(row) + "\n")
    print(f"wrote {os.path.normpath(out)}: {free} free / {occupied} occupied")


if __name__ == "__main__":
    main()
