from citex.main import main

main()
