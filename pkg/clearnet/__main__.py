from .expcli import main

raise SystemExit(main())
