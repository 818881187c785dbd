"""Model checking as program verification over MOKA stack programs."""
