# reports: problem-file schema, report rendering and the subcommand registry.
