#pragma once

#include "infrasim/network.hpp"

namespace infrasim
{
    /// The built-in simple integrated network.
    ///
    /// Component counts: power 9 buses, 3 loads, 1 motor, 1 external grid,
    /// 5 lines, 2 transformers; water 12 pipes, 9 demand nodes, 1 pump,
    /// 1 tank, 1 reservoir; traffic 22 road links over 9 zones that both
    /// generate and attract trips.
    ///
    /// Layout (planar meters, 500 m block grid):
    ///  - traffic: 3x3 grid of intersections T_N1..T_N9 (row-major from the
    ///    origin), bidirectional links on every block edge except T_N5-T_N8.
    ///  - water: reservoir W_R1 -> pump W_PU1 -> demand node grid W_J1..W_J9
    ///    (offset 40 m from the intersections), pipes on every block edge
    ///    except W_J5-W_J6, elevated tank W_T1 beyond the far corner W_J9.
    ///  - power: external grid at P_B1, transformers to two substations,
    ///    radial feeders; motor P_M1 (drives W_PU1) sits on P_B4 fed by P_L1.
    ///    P_B9 is a spare pole with nothing attached.
    IntegratedNetwork build_simple_testbed();
}
