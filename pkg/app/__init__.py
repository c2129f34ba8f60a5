"""BDF-GIRG sampling and analysis."""
