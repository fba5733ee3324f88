#define loop(a) loop(list(a))
loop(int)
