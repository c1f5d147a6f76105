# Enums and numeric result types
